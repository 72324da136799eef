#pragma once

#include <string>
#include <vector>

#include "dater/provider.hpp"
#include "dater/table.hpp"

namespace dater {

class UnparseableSelection : public Error {
public:
    using Error::Error;
};
class EmptySelection : public Error {
public:
    using Error::Error;
};

// One in-context example for the row/column selection stage.
struct EvidenceExemplar {
    Table table;
    std::string question;
    IndexSelection selection;
};

struct IndexParse {
    IndexSelection selection;
    std::vector<std::string> dropped; // entries that were out of range or unknown
};

struct EvidenceTrace {
    std::string raw_response;
    std::vector<int> rows;
    std::vector<int> cols;
    std::vector<std::string> dropped;
    bool fallback = false;   // selection unusable, full table kept
    bool skipped = false;    // stage disabled (ablation / baseline)
    size_t truncated_rows = 0; // rows shown to the model when the table had to be cut
};

struct EvidenceResult {
    Table sub_table;
    IndexSelection selection;
    EvidenceTrace trace;
};

// Instruction block, exemplars (linearized table, question, ROWS/COLS
// answer lines), then the test table and question ending at the answer cue.
std::string build_evidence_prompt(const Table& table,
                                  const std::string& question,
                                  const std::vector<EvidenceExemplar>& exemplars);

// Reads the first ROWS:/COLS: lines. `*` selects everything; row numbers
// outside the table and unknown column names are dropped (and reported);
// duplicates collapse; the result is sorted ascending.
IndexParse parse_index_response(const std::string& response, const Table& table);

// Full stage: ask, parse, extract. An unusable selection falls back to
// the full table; only provider errors escape. When the prompt would blow
// the context budget the test table is truncated to the first rows that
// fit (budget 0 = unlimited).
EvidenceResult decompose_evidence(const Table& table,
                                  const std::string& question,
                                  llm::Provider& provider,
                                  const std::vector<EvidenceExemplar>& exemplars,
                                  size_t context_budget_chars);

} // namespace dater
