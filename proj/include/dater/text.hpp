#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dater::text {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

// Collapses every run of whitespace to a single space. Does not trim.
std::string collapse_spaces(std::string_view s);

// trim + collapse + lowercase, the comparison form used for cell and
// header matching throughout the pipeline.
std::string fold(std::string_view s);

bool ci_equal(std::string_view a, std::string_view b);

// Parses a cell-style number: optional leading +/- (ASCII or U+2212),
// optional currency sign, digits with optional comma thousands groups,
// optional decimal fraction. Returns nullopt for anything else; dates,
// exponents and percent forms stay text.
std::optional<double> parse_number(std::string_view s);

// Shortest decimal rendering: integral values without a decimal point,
// everything else with the minimal digits that round-trip.
std::string format_number(double value);

std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

} // namespace dater::text
