#pragma once

#include <map>
#include <string>
#include <vector>

#include "dater/config.hpp"
#include "dater/dataset.hpp"
#include "dater/evidence.hpp"
#include "dater/metrics.hpp"
#include "dater/provider.hpp"
#include "dater/question.hpp"
#include "dater/reasoner.hpp"

namespace dater {

// In-context examples for all four prompt stages, loaded from JSON files.
struct StageExemplars {
    std::vector<EvidenceExemplar> evidence;
    std::vector<ClozeExemplar> cloze;
    std::vector<SqlExemplar> sql;
    std::vector<JointExemplar> joint;
};

std::vector<EvidenceExemplar> load_evidence_exemplars(const std::string& path);
std::vector<ClozeExemplar> load_cloze_exemplars(const std::string& path);
std::vector<SqlExemplar> load_sql_exemplars(const std::string& path);
std::vector<JointExemplar> load_joint_exemplars(const std::string& path);
StageExemplars load_exemplars(const RunConfig& config);

void write_evidence_exemplars(const std::vector<EvidenceExemplar>& exemplars,
                              const std::string& path);
void write_cloze_exemplars(const std::vector<ClozeExemplar>& exemplars, const std::string& path);
void write_sql_exemplars(const std::vector<SqlExemplar>& exemplars, const std::string& path);
void write_joint_exemplars(const std::vector<JointExemplar>& exemplars, const std::string& path);

struct ExampleOutcome {
    std::string id;
    std::string task; // "fv" | "qa" | "free"
    std::string predicted;
    std::vector<std::string> gold;
    bool correct = false;
    std::map<std::string, double> scores; // per-example sentence metrics (free-form)
};

struct EvalReport {
    size_t examples = 0;
    size_t provider_errors = 0;
    std::map<std::string, size_t> task_counts;
    std::map<std::string, double> metrics;
    double mean_cells_before = 0.0;
    double mean_cells_after = 0.0;
    double reduction_factor = 0.0;
    std::vector<ExampleOutcome> outcomes; // ordered by id
    std::vector<std::string> notes;
};

// Scores traces against their recorded gold answers. Fact verification uses
// exact-match accuracy over yes/no; short answers use order-insensitive
// denotation accuracy; free-form answers use corpus BLEU plus mean ROUGE.
// Identical traces always produce an identical report.
EvalReport evaluate(const std::vector<DecompositionTrace>& traces);

// Byte-stable JSON rendering (sorted keys, fixed layout).
std::string report_to_json(const EvalReport& report);
void write_report(const EvalReport& report, const std::string& path);

// Runs the pipeline over the examples with a worker pool of
// config.parallelism threads. Stage skipping follows config.ablate_* (the
// baseline mode sets both). Per-example provider failures are recorded in
// the trace's error field rather than aborting the run.
std::vector<DecompositionTrace> run_pipeline(const RunConfig& config,
                                             const std::vector<Example>& examples,
                                             llm::Provider& provider,
                                             const StageExemplars& exemplars);

// Single-stage variants used by the stage subcommands; they fill only their
// own section of each trace.
std::vector<DecompositionTrace> run_evidence_stage(const RunConfig& config,
                                                   const std::vector<Example>& examples,
                                                   llm::Provider& provider,
                                                   const StageExemplars& exemplars);
std::vector<DecompositionTrace> run_question_stage(const RunConfig& config,
                                                   const std::vector<Example>& examples,
                                                   llm::Provider& provider,
                                                   const StageExemplars& exemplars);
// Re-runs only the answer stage on prior traces (sub-table and backfilled
// question reconstructed from each trace).
std::vector<DecompositionTrace> run_answer_stage(const RunConfig& config,
                                                 const std::vector<Example>& examples,
                                                 const std::vector<DecompositionTrace>& prior,
                                                 llm::Provider& provider,
                                                 const StageExemplars& exemplars);

// Human-readable multi-line rendering of one trace for `inspect`.
std::string format_trace(const DecompositionTrace& trace);

} // namespace dater
