#include "dater/text.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>

namespace dater::text {

namespace {

bool is_space(char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
}

bool is_digit(char c) {
    return c >= '0' && c <= '9';
}

// Strips one currency marker if present. The multi-byte ones are UTF-8.
bool strip_currency(std::string_view& s) {
    static const std::string_view signs[] = {"$", "€", "£", "¥"};
    for (auto sign : signs) {
        if (s.substr(0, sign.size()) == sign) {
            s.remove_prefix(sign.size());
            return true;
        }
    }
    return false;
}

bool strip_sign(std::string_view& s, bool& negative) {
    if (!s.empty() && (s[0] == '+' || s[0] == '-')) {
        negative = s[0] == '-';
        s.remove_prefix(1);
        return true;
    }
    if (s.substr(0, 3) == "−") { // typographic minus
        negative = true;
        s.remove_prefix(3);
        return true;
    }
    return false;
}

// Digits, optionally grouped as d{1,3}(,ddd)+. Returns the digits with
// commas removed, or nullopt when the grouping is malformed.
std::optional<std::string> read_integer_part(std::string_view& s) {
    size_t i = 0;
    while (i < s.size() && (is_digit(s[i]) || s[i] == ',')) i++;
    std::string_view part = s.substr(0, i);
    if (part.empty()) return std::string();
    if (part.front() == ',' || part.back() == ',') return std::nullopt;
    std::string digits;
    if (part.find(',') != std::string_view::npos) {
        auto groups = split(std::string(part), ',');
        if (groups.front().empty() || groups.front().size() > 3) return std::nullopt;
        for (size_t g = 1; g < groups.size(); ++g)
            if (groups[g].size() != 3) return std::nullopt;
        for (auto& g : groups) digits += g;
    } else {
        digits = std::string(part);
    }
    s.remove_prefix(i);
    return digits;
}

} // namespace

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && is_space(s[b])) b++;
    while (e > b && is_space(s[e - 1])) e--;
    return std::string(s.substr(b, e - b));
}

std::string collapse_spaces(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_space = false;
    for (char c : s) {
        if (is_space(c)) {
            in_space = true;
            continue;
        }
        if (in_space && !out.empty()) out.push_back(' ');
        in_space = false;
        out.push_back(c);
    }
    return out;
}

std::string fold(std::string_view s) {
    return to_lower(collapse_spaces(trim(s)));
}

bool ci_equal(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i])))
            return false;
    }
    return true;
}

std::optional<double> parse_number(std::string_view s) {
    std::string trimmed = trim(s);
    std::string_view v = trimmed;
    if (v.empty()) return std::nullopt;

    bool negative = false;
    bool saw_sign = strip_sign(v, negative);
    bool saw_currency = strip_currency(v);
    if (!saw_sign && saw_currency) strip_sign(v, negative);

    auto integer = read_integer_part(v);
    if (!integer) return std::nullopt;

    std::string digits = *integer;
    std::string fraction;
    if (!v.empty() && v[0] == '.') {
        v.remove_prefix(1);
        while (!v.empty() && is_digit(v[0])) {
            fraction.push_back(v[0]);
            v.remove_prefix(1);
        }
        if (fraction.empty()) return std::nullopt;
    }
    if (!v.empty()) return std::nullopt;
    if (digits.empty() && fraction.empty()) return std::nullopt;

    std::string plain = (negative ? "-" : "") + (digits.empty() ? "0" : digits);
    if (!fraction.empty()) plain += "." + fraction;

    double value = 0;
    auto [ptr, ec] = std::from_chars(plain.data(), plain.data() + plain.size(), value);
    if (ec != std::errc() || ptr != plain.data() + plain.size()) return std::nullopt;
    return value;
}

std::string format_number(double value) {
    if (std::isfinite(value) && value == std::floor(value) &&
        std::abs(value) < 9.0e15) {
        return std::to_string(static_cast<long long>(value));
    }
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value,
                                   std::chars_format::fixed);
    if (ec != std::errc()) {
        std::snprintf(buf, sizeof(buf), "%.17g", value);
        return std::string(buf);
    }
    return std::string(buf, ptr);
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    size_t start = 0;
    for (size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.emplace_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

} // namespace dater::text
