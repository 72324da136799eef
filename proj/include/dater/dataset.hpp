#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dater/evidence.hpp"
#include "dater/question.hpp"
#include "dater/reasoner.hpp"
#include "dater/table.hpp"

namespace dater {

class ParseError : public Error {
public:
    using Error::Error;
};
class SchemaError : public Error {
public:
    using Error::Error;
};
class StorageFailure : public Error {
public:
    using Error::Error;
};

enum class DatasetFormat { Canonical, TabFact, Wtq, FetaQa };

DatasetFormat dataset_format_from_name(const std::string& name);
std::string dataset_format_name(DatasetFormat format);

struct Example {
    std::string id;
    Task task = Task::QuestionAnswering;
    Table table{"", {"c"}, {{""}}};
    std::string question;
    std::vector<std::string> gold; // non-empty; fv uses "yes"/"no"
};

struct AnswerTrace {
    std::vector<std::string> samples;
    std::map<std::string, int> votes;
    std::string final;
    bool fallback = false;
    bool tie_break = false;
    int discarded = 0;
};

AnswerTrace answer_trace_from(const AnswerRecord& record);

struct DecompositionTrace {
    std::string id;
    Task task = Task::QuestionAnswering;
    std::string question;
    std::vector<std::string> gold;
    size_t cells_before = 0;
    size_t cells_after = 0;
    EvidenceTrace evidence;
    QuestionTrace question_stage;
    AnswerTrace answer_stage;
    std::map<std::string, long long> timings_ms; // empty unless timing enabled
    std::string error; // non-empty when the example aborted

    bool operator==(const DecompositionTrace&) const = default;
};

bool operator==(const EvidenceTrace&, const EvidenceTrace&);
bool operator==(const QueryStatus&, const QueryStatus&);
bool operator==(const QuestionTrace&, const QuestionTrace&);
bool operator==(const AnswerTrace&, const AnswerTrace&);

// Loads a benchmark file into canonical examples.
//   canonical: JSONL {"id","task","table":{"caption","header","rows"},"question","gold":[..]}
//   tabfact:   JSONL {"id","caption","table":[[hdr..],[row..]..],"statement","label":0|1}
//   wtq:       TSV with header id/utterance/context/targetValue; context is a
//              CSV path relative to the TSV; targetValue splits on '|'
//   fetaqa:    JSONL {"feta_id","table_page_title","table_array":[[hdr..],..],"question","answer"}
// Ragged table rows are padded with empty cells (a warning goes to stderr).
// With skip_invalid, examples whose table cannot be built are skipped with a
// warning instead of failing the load.
std::vector<Example> load_dataset(const std::string& path, DatasetFormat format,
                                  bool skip_invalid = false);

// Writes examples in the canonical JSONL layout.
void write_canonical(const std::vector<Example>& examples, const std::string& path);

// JSON-lines traces ordered by example id; read(write(x)) == x.
void write_traces(const std::vector<DecompositionTrace>& traces, const std::string& path);
std::vector<DecompositionTrace> read_traces(const std::string& path);

std::string trace_to_json(const DecompositionTrace& trace);
DecompositionTrace trace_from_json(const std::string& line);

// Canonical table JSON: {"caption", "header", "rows"}.
nlohmann::json table_to_json(const Table& table);
Table table_from_json(const nlohmann::json& j, const std::string& where);

} // namespace dater
