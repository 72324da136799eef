#include "dater/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <utility>

#include "dater/text.hpp"

namespace dater::metrics {

using namespace dater::text;

namespace {

bool is_word_byte(unsigned char ch) {
    return std::isalnum(ch) || ch >= 0x80;
}

using Counts = std::map<std::vector<std::string>, int64_t>;

Counts ngram_counts(const std::vector<std::string>& tokens, size_t n) {
    Counts counts;
    if (tokens.size() < n) return counts;
    for (size_t i = 0; i + n <= tokens.size(); ++i)
        ++counts[std::vector<std::string>(tokens.begin() + static_cast<long>(i),
                                          tokens.begin() + static_cast<long>(i + n))];
    return counts;
}

double f1(double precision, double recall) {
    return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

// Clipped-overlap F1 of n-gram counts.
double overlap_f1(const std::vector<std::string>& pred, const std::vector<std::string>& ref, size_t n) {
    if (pred.empty() && ref.empty()) return 1.0;
    Counts pc = ngram_counts(pred, n);
    Counts rc = ngram_counts(ref, n);
    int64_t match = 0, pred_total = 0, ref_total = 0;
    for (const auto& [gram, count] : pc) {
        pred_total += count;
        auto it = rc.find(gram);
        if (it != rc.end()) match += std::min(count, it->second);
    }
    for (const auto& [gram, count] : rc) ref_total += count;
    if (pred_total == 0 || ref_total == 0) return 0.0;
    return f1(static_cast<double>(match) / static_cast<double>(pred_total),
              static_cast<double>(match) / static_cast<double>(ref_total));
}

size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (size_t i = 1; i <= a.size(); ++i) {
        for (size_t j = 1; j <= b.size(); ++j)
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

} // namespace

std::vector<std::string> tokenize(const std::string& text) {
    std::string lowered = to_lower(text);
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char ch : lowered) {
        if (std::isspace(ch)) {
            if (!current.empty()) tokens.push_back(std::exchange(current, {}));
        } else if (is_word_byte(ch)) {
            current += static_cast<char>(ch);
        } else {
            if (!current.empty()) tokens.push_back(std::exchange(current, {}));
            tokens.push_back(std::string(1, static_cast<char>(ch)));
        }
    }
    if (!current.empty()) tokens.push_back(current);
    return tokens;
}

double binary_accuracy(const std::vector<std::string>& predictions,
                       const std::vector<std::string>& golds) {
    if (predictions.size() != golds.size())
        throw LengthMismatch("accuracy over " + std::to_string(predictions.size()) +
                             " predictions vs " + std::to_string(golds.size()) + " golds");
    if (predictions.empty()) return 0.0;
    size_t hits = 0;
    for (size_t i = 0; i < predictions.size(); ++i)
        if (predictions[i] == golds[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

std::string normalize_value(const std::string& value) {
    std::string t = trim(value);
    while (t.size() >= 2 && ((t.front() == '"' && t.back() == '"') ||
                             (t.front() == '\'' && t.back() == '\'')))
        t = trim(t.substr(1, t.size() - 2));
    t = collapse_spaces(to_lower(t));
    if (std::optional<double> num = parse_number(t)) t = format_number(*num);
    return t;
}

bool denotation_match(const std::vector<std::string>& predicted,
                      const std::vector<std::string>& gold) {
    if (predicted.size() != gold.size()) return false;
    std::vector<std::string> p, g;
    p.reserve(predicted.size());
    g.reserve(gold.size());
    for (const std::string& v : predicted) p.push_back(normalize_value(v));
    for (const std::string& v : gold) g.push_back(normalize_value(v));
    std::sort(p.begin(), p.end());
    std::sort(g.begin(), g.end());
    return p == g;
}

std::vector<std::string> split_values(const std::string& text) {
    std::vector<std::string> values;
    if (text.find('|') != std::string::npos) {
        for (const std::string& v : split(text, '|'))
            if (!trim(v).empty()) values.push_back(trim(v));
    } else {
        size_t from = 0;
        for (size_t pos = text.find(", "); pos != std::string::npos; pos = text.find(", ", from)) {
            if (!trim(text.substr(from, pos - from)).empty())
                values.push_back(trim(text.substr(from, pos - from)));
            from = pos + 2;
        }
        if (!trim(text.substr(from)).empty()) values.push_back(trim(text.substr(from)));
    }
    if (values.empty()) values.push_back(trim(text));
    return values;
}

void BleuStats::add(const std::string& prediction, const std::vector<std::string>& references) {
    if (references.empty()) throw EmptyReference("BLEU needs at least one reference");
    std::vector<std::string> pred = tokenize(prediction);
    std::vector<std::vector<std::string>> refs;
    refs.reserve(references.size());
    for (const std::string& r : references) refs.push_back(tokenize(r));

    prediction_length += static_cast<int64_t>(pred.size());
    // Closest reference length; ties prefer the shorter reference.
    size_t best_len = refs[0].size();
    for (const std::vector<std::string>& r : refs) {
        int64_t diff = std::llabs(static_cast<int64_t>(r.size()) - static_cast<int64_t>(pred.size()));
        int64_t best_diff =
            std::llabs(static_cast<int64_t>(best_len) - static_cast<int64_t>(pred.size()));
        if (diff < best_diff || (diff == best_diff && r.size() < best_len)) best_len = r.size();
    }
    reference_length += static_cast<int64_t>(best_len);

    for (size_t n = 1; n <= 4; ++n) {
        Counts pc = ngram_counts(pred, n);
        Counts max_ref;
        for (const std::vector<std::string>& r : refs)
            for (const auto& [gram, count] : ngram_counts(r, n))
                max_ref[gram] = std::max(max_ref[gram], count);
        int64_t clipped_n = 0, total_n = 0;
        for (const auto& [gram, count] : pc) {
            total_n += count;
            auto it = max_ref.find(gram);
            if (it != max_ref.end()) clipped_n += std::min(count, it->second);
        }
        clipped[n - 1] += clipped_n;
        totals[n - 1] += total_n;
    }
}

double BleuStats::score() const {
    if (prediction_length == 0 || totals[0] == 0 || clipped[0] == 0) return 0.0;
    double log_sum = 0.0;
    for (size_t n = 0; n < 4; ++n) {
        double p;
        if (n == 0) {
            p = static_cast<double>(clipped[0]) / static_cast<double>(totals[0]);
        } else if (totals[n] == 0) {
            p = 1.0;
        } else if (clipped[n] == 0) {
            p = 1.0 / static_cast<double>(totals[n] + 1);
        } else {
            p = static_cast<double>(clipped[n]) / static_cast<double>(totals[n]);
        }
        log_sum += std::log(p);
    }
    double brevity = prediction_length >= reference_length
                         ? 1.0
                         : std::exp(1.0 - static_cast<double>(reference_length) /
                                              static_cast<double>(prediction_length));
    return 100.0 * brevity * std::exp(log_sum / 4.0);
}

double bleu(const std::string& prediction, const std::vector<std::string>& references) {
    BleuStats stats;
    stats.add(prediction, references);
    return stats.score();
}

RougeScores rouge(const std::string& prediction, const std::string& reference) {
    std::vector<std::string> pred = tokenize(prediction);
    std::vector<std::string> ref = tokenize(reference);
    RougeScores scores;
    scores.rouge1 = overlap_f1(pred, ref, 1);
    scores.rouge2 = overlap_f1(pred, ref, 2);
    if (pred.empty() && ref.empty()) {
        scores.rougeL = 1.0;
    } else if (pred.empty() || ref.empty()) {
        scores.rougeL = 0.0;
    } else {
        double lcs = static_cast<double>(lcs_length(pred, ref));
        scores.rougeL = f1(lcs / static_cast<double>(pred.size()),
                           lcs / static_cast<double>(ref.size()));
    }
    return scores;
}

ReductionReport reduction_report(const std::vector<std::pair<size_t, size_t>>& before_after) {
    ReductionReport report;
    if (before_after.empty()) return report;
    double before = 0.0, after = 0.0;
    for (const auto& [b, a] : before_after) {
        before += static_cast<double>(b);
        after += static_cast<double>(a);
    }
    report.mean_cells_before = before / static_cast<double>(before_after.size());
    report.mean_cells_after = after / static_cast<double>(before_after.size());
    return report;
}

} // namespace dater::metrics
