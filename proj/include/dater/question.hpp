#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dater/provider.hpp"
#include "dater/sql.hpp"
#include "dater/table.hpp"

namespace dater {

class UnparseableCloze : public Error {
public:
    using Error::Error;
};
class CountMismatch : public Error {
public:
    using Error::Error;
};

// The placeholder token the cloze stage masks values with.
inline constexpr const char* kPlaceholder = "{...}";

// A question split into numbered sub-questions whose concrete values are
// masked with `{...}` placeholders.
struct ClozeQuestion {
    std::vector<std::string> segments;

    size_t placeholder_count() const;
};

struct Fill {
    std::string sql;    // canonical text of the query that produced the value
    std::string result; // formatted result substituted into the placeholder
};

struct BackfilledQuestion {
    std::vector<std::string> segments; // placeholders replaced by {value}
    std::vector<Fill> fills;           // one per placeholder, in order
};

struct ClozeExemplar {
    Table table;
    std::string question;
    std::vector<std::string> sub_questions;
};

struct SqlExemplar {
    Table table;
    std::vector<std::string> sub_questions;
    std::vector<std::string> queries;
};

struct SqlCandidate {
    std::string text;                       // raw query text from the model
    std::optional<std::string> parse_error; // set when parse_sql rejected it
};

struct QueryStatus {
    std::string text;
    std::string status; // "ok" | "parse_error" | "exec_error"
    std::string error;
    std::string result;
};

struct QuestionTrace {
    std::string raw_cloze;
    std::vector<std::string> segments;
    size_t placeholders = 0;
    std::string raw_sql;
    std::vector<QueryStatus> queries;
    std::vector<std::string> backfilled;
    bool fallback = false; // stage result unusable, original question kept
    bool skipped = false;  // stage disabled (ablation / baseline)
};

struct QuestionResult {
    BackfilledQuestion backfilled;
    QuestionTrace trace;
};

// "qN: text" lines, one sub-question per line.
std::string render_sub_questions(const std::vector<std::string>& segments);

std::string build_cloze_prompt(const Table& table,
                               const std::string& question,
                               const std::vector<ClozeExemplar>& exemplars);

std::string build_sql_prompt(const Table& table,
                             const ClozeQuestion& cloze,
                             const std::vector<SqlExemplar>& exemplars);

// Splits a completion on its "q1:", "q2:", ... markers (appearance order).
// Throws UnparseableCloze when there is no q1 marker.
ClozeQuestion parse_cloze_response(const std::string& response);

// Keeps the lines that are SQL statements (optionally prefixed "sN:").
// Throws CountMismatch unless exactly `expected` queries are found; each
// candidate carries its own parse verdict.
std::vector<SqlCandidate> parse_sql_response(const std::string& response,
                                             const Table& table,
                                             size_t expected);

struct ClozeGeneration {
    ClozeQuestion cloze;
    std::string raw_response;
};

struct SqlGeneration {
    std::vector<SqlCandidate> queries;
    std::string raw_response;
};

ClozeGeneration generate_cloze(const std::string& question,
                               const Table& table,
                               llm::Provider& provider,
                               const std::vector<ClozeExemplar>& exemplars);

// Requires cloze.placeholder_count() >= 1.
SqlGeneration generate_sql(const ClozeQuestion& cloze,
                           const Table& table,
                           llm::Provider& provider,
                           const std::vector<SqlExemplar>& exemplars);

// Replaces the i-th placeholder with "{<fills[i].result>}"; text outside the
// braces is untouched. Throws CountMismatch when the counts differ.
BackfilledQuestion backfill(const ClozeQuestion& cloze, const std::vector<Fill>& fills);
BackfilledQuestion backfill(const ClozeQuestion& cloze, const std::vector<sql::SqlResult>& results);

// Full stage: cloze split, one SQL query per placeholder, execution against
// the full table, backfill. A query that fails to parse or execute fills its
// placeholder with "unknown"; an unusable cloze or a query-count mismatch
// falls back to the original question untouched.
QuestionResult decompose_question(const std::string& question,
                                  const Table& table,
                                  llm::Provider& provider,
                                  const std::vector<ClozeExemplar>& cloze_exemplars,
                                  const std::vector<SqlExemplar>& sql_exemplars);

} // namespace dater
