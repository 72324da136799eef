#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dater/errors.hpp"

namespace dater::metrics {

class MetricError : public Error {
public:
    using Error::Error;
};
class LengthMismatch : public MetricError {
public:
    using MetricError::MetricError;
};
class EmptyReference : public MetricError {
public:
    using MetricError::MetricError;
};

// Lowercases, splits punctuation into standalone tokens, splits on
// whitespace. Bytes >= 0x80 are treated as word characters so multi-byte
// UTF-8 sequences stay intact.
std::vector<std::string> tokenize(const std::string& text);

// Exact-match rate between equally long prediction/gold lists.
double binary_accuracy(const std::vector<std::string>& predictions,
                       const std::vector<std::string>& golds);

// Canonical form for denotation comparison: lowercase, trim, surrounding
// quotes stripped, whitespace collapsed, numbers rewritten canonically.
std::string normalize_value(const std::string& value);

// Multiset equality of normalized values (order-insensitive).
bool denotation_match(const std::vector<std::string>& predicted,
                      const std::vector<std::string>& gold);

// Splits a prediction string on '|' or ", " into individual values.
std::vector<std::string> split_values(const std::string& text);

// Sufficient statistics for corpus-level BLEU-4.
struct BleuStats {
    std::array<int64_t, 4> clipped{0, 0, 0, 0};
    std::array<int64_t, 4> totals{0, 0, 0, 0};
    int64_t prediction_length = 0;
    int64_t reference_length = 0; // closest reference length per sentence

    void add(const std::string& prediction, const std::vector<std::string>& references);
    // 0..100. Zero unigram precision scores 0; higher orders with zero
    // matches smooth to 1/(total+1).
    double score() const;
};

// Sentence BLEU: a corpus of one pair.
double bleu(const std::string& prediction, const std::vector<std::string>& references);

struct RougeScores {
    double rouge1 = 0.0;
    double rouge2 = 0.0;
    double rougeL = 0.0;
};

// F1 over unigram overlap, bigram overlap, and longest common subsequence.
RougeScores rouge(const std::string& prediction, const std::string& reference);

struct ReductionReport {
    double mean_cells_before = 0.0;
    double mean_cells_after = 0.0;

    double factor() const {
        return mean_cells_after > 0.0 ? mean_cells_before / mean_cells_after : 0.0;
    }
};

ReductionReport reduction_report(const std::vector<std::pair<size_t, size_t>>& before_after);

} // namespace dater::metrics
