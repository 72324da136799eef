#include "dater/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "dater/table.hpp"
#include "dater/text.hpp"

namespace dater {

using namespace text;
using nlohmann::json;

namespace {

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw StorageFailure("cannot open " + path + " for reading");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void write_json_file(const json& j, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw StorageFailure("cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
    if (!out.flush()) throw StorageFailure("failed writing " + path);
}

json exemplar_array(json j, const std::string& path) {
    if (!j.is_array()) throw SchemaError(path + ": exemplar file must be a JSON array");
    if (j.empty()) throw SchemaError(path + ": exemplar file is empty");
    return j;
}

std::vector<std::string> string_list(const json& j, const std::string& where) {
    if (!j.is_array()) throw SchemaError(where + ": expected an array of strings");
    std::vector<std::string> out;
    for (const json& v : j) {
        if (!v.is_string()) throw SchemaError(where + ": expected an array of strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

std::vector<int> int_list(const json& j, const std::string& where) {
    if (!j.is_array()) throw SchemaError(where + ": expected an array of integers");
    std::vector<int> out;
    for (const json& v : j) {
        if (!v.is_number_integer()) throw SchemaError(where + ": expected an array of integers");
        out.push_back(v.get<int>());
    }
    return out;
}

std::string join_ints(const std::vector<int>& values) {
    std::ostringstream out;
    for (size_t i = 0; i < values.size(); ++i) out << (i ? ", " : "") << values[i];
    return out.str();
}

long long elapsed_ms(std::chrono::steady_clock::time_point from) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - from)
        .count();
}

// What one example runs; stage toggles come from config + subcommand.
struct StagePlan {
    bool evidence = true;
    bool question = true;
    bool answer = true;
};

DecompositionTrace process_example(const RunConfig& config,
                                   const Example& example,
                                   llm::Provider& provider,
                                   const StageExemplars& exemplars,
                                   const StagePlan& plan) {
    DecompositionTrace trace;
    trace.id = example.id;
    trace.task = example.task;
    trace.question = example.question;
    trace.gold = example.gold;
    trace.cells_before = cell_count(example.table);

    Table sub = example.table;
    try {
        if (plan.evidence && !config.ablate_evidence) {
            auto started = std::chrono::steady_clock::now();
            EvidenceResult ev = decompose_evidence(example.table, example.question, provider,
                                                   exemplars.evidence, config.context_budget_chars);
            if (config.timings) trace.timings_ms["evidence"] = elapsed_ms(started);
            trace.evidence = ev.trace;
            sub = ev.sub_table;
        } else {
            trace.evidence.skipped = true;
        }
        trace.cells_after = cell_count(sub);

        BackfilledQuestion backfilled;
        if (plan.question && !config.ablate_question) {
            auto started = std::chrono::steady_clock::now();
            QuestionResult qr = decompose_question(example.question, example.table, provider,
                                                   exemplars.cloze, exemplars.sql);
            if (config.timings) trace.timings_ms["question"] = elapsed_ms(started);
            trace.question_stage = qr.trace;
            backfilled = qr.backfilled;
        } else {
            trace.question_stage.skipped = true;
            backfilled.segments = {example.question};
            trace.question_stage.segments = backfilled.segments;
            trace.question_stage.backfilled = backfilled.segments;
        }

        if (plan.answer) {
            auto started = std::chrono::steady_clock::now();
            AnswerRecord record = answer(sub, backfilled, example.question, provider,
                                         exemplars.joint, config.n_samples, config.temperature,
                                         example.task);
            if (config.timings) trace.timings_ms["answer"] = elapsed_ms(started);
            trace.answer_stage = answer_trace_from(record);
        }
    } catch (const llm::ProviderError& e) {
        trace.error = e.what();
        if (trace.cells_after == 0) trace.cells_after = cell_count(sub);
    }
    return trace;
}

std::vector<DecompositionTrace> run_examples(const RunConfig& config,
                                             const std::vector<Example>& examples,
                                             llm::Provider& provider,
                                             const StageExemplars& exemplars,
                                             const StagePlan& plan) {
    std::vector<DecompositionTrace> traces(examples.size());
    if (examples.empty()) return traces;

    std::atomic<size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (size_t i = next.fetch_add(1); i < examples.size(); i = next.fetch_add(1)) {
            try {
                traces[i] = process_example(config, examples[i], provider, exemplars, plan);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };

    size_t threads = std::min<size_t>(static_cast<size_t>(config.parallelism), examples.size());
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    std::sort(traces.begin(), traces.end(),
              [](const DecompositionTrace& a, const DecompositionTrace& b) { return a.id < b.id; });
    return traces;
}

} // namespace

std::vector<EvidenceExemplar> load_evidence_exemplars(const std::string& path) {
    std::vector<EvidenceExemplar> out;
    for (const json& j : exemplar_array(load_json_file(path), path)) {
        EvidenceExemplar ex{table_from_json(j.at("table"), path), j.at("question").get<std::string>(),
                            IndexSelection::normalized(int_list(j.at("rows"), path),
                                                       int_list(j.at("cols"), path))};
        out.push_back(std::move(ex));
    }
    return out;
}

std::vector<ClozeExemplar> load_cloze_exemplars(const std::string& path) {
    std::vector<ClozeExemplar> out;
    for (const json& j : exemplar_array(load_json_file(path), path))
        out.push_back(ClozeExemplar{table_from_json(j.at("table"), path),
                                    j.at("question").get<std::string>(),
                                    string_list(j.at("sub_questions"), path)});
    return out;
}

std::vector<SqlExemplar> load_sql_exemplars(const std::string& path) {
    std::vector<SqlExemplar> out;
    for (const json& j : exemplar_array(load_json_file(path), path))
        out.push_back(SqlExemplar{table_from_json(j.at("table"), path),
                                  string_list(j.at("sub_questions"), path),
                                  string_list(j.at("queries"), path)});
    return out;
}

std::vector<JointExemplar> load_joint_exemplars(const std::string& path) {
    std::vector<JointExemplar> out;
    for (const json& j : exemplar_array(load_json_file(path), path))
        out.push_back(JointExemplar{table_from_json(j.at("table"), path),
                                    string_list(j.at("sub_questions"), path),
                                    j.at("question").get<std::string>(),
                                    j.at("answer").get<std::string>()});
    return out;
}

StageExemplars load_exemplars(const RunConfig& config) {
    StageExemplars xs;
    bool evidence_needed = !config.ablate_evidence;
    bool question_needed = !config.ablate_question;
    if (evidence_needed) {
        if (config.evidence_exemplars.empty())
            throw ConfigError("evidence_exemplars path is required unless ablate_evidence is set");
        xs.evidence = load_evidence_exemplars(config.evidence_exemplars);
    }
    if (question_needed) {
        if (config.cloze_exemplars.empty() || config.sql_exemplars.empty())
            throw ConfigError(
                "cloze_exemplars and sql_exemplars paths are required unless ablate_question is set");
        xs.cloze = load_cloze_exemplars(config.cloze_exemplars);
        xs.sql = load_sql_exemplars(config.sql_exemplars);
    }
    if (config.joint_exemplars.empty())
        throw ConfigError("joint_exemplars path is required");
    xs.joint = load_joint_exemplars(config.joint_exemplars);
    return xs;
}

void write_evidence_exemplars(const std::vector<EvidenceExemplar>& exemplars,
                              const std::string& path) {
    json arr = json::array();
    for (const EvidenceExemplar& ex : exemplars)
        arr.push_back(json{{"table", table_to_json(ex.table)},
                           {"question", ex.question},
                           {"rows", ex.selection.rows},
                           {"cols", ex.selection.cols}});
    write_json_file(arr, path);
}

void write_cloze_exemplars(const std::vector<ClozeExemplar>& exemplars, const std::string& path) {
    json arr = json::array();
    for (const ClozeExemplar& ex : exemplars)
        arr.push_back(json{{"table", table_to_json(ex.table)},
                           {"question", ex.question},
                           {"sub_questions", ex.sub_questions}});
    write_json_file(arr, path);
}

void write_sql_exemplars(const std::vector<SqlExemplar>& exemplars, const std::string& path) {
    json arr = json::array();
    for (const SqlExemplar& ex : exemplars)
        arr.push_back(json{{"table", table_to_json(ex.table)},
                           {"sub_questions", ex.sub_questions},
                           {"queries", ex.queries}});
    write_json_file(arr, path);
}

void write_joint_exemplars(const std::vector<JointExemplar>& exemplars, const std::string& path) {
    json arr = json::array();
    for (const JointExemplar& ex : exemplars)
        arr.push_back(json{{"table", table_to_json(ex.table)},
                           {"sub_questions", ex.sub_questions},
                           {"question", ex.question},
                           {"answer", ex.answer}});
    write_json_file(arr, path);
}

EvalReport evaluate(const std::vector<DecompositionTrace>& traces) {
    std::vector<DecompositionTrace> ordered = traces;
    std::sort(ordered.begin(), ordered.end(),
              [](const DecompositionTrace& a, const DecompositionTrace& b) { return a.id < b.id; });

    EvalReport report;
    report.examples = ordered.size();
    report.notes = {
        "temperature and n_samples defaults are artifact choices; set them in the run config",
        "short answers are scored with order-insensitive denotation matching",
    };

    size_t fv_total = 0, fv_correct = 0;
    size_t qa_total = 0, qa_correct = 0;
    size_t free_total = 0;
    metrics::BleuStats corpus_bleu;
    double rouge1_sum = 0, rouge2_sum = 0, rougeL_sum = 0;
    double cells_before = 0, cells_after = 0;

    for (const DecompositionTrace& t : ordered) {
        if (!t.error.empty()) ++report.provider_errors;
        ++report.task_counts[task_name(t.task)];
        cells_before += static_cast<double>(t.cells_before);
        cells_after += static_cast<double>(t.cells_after);

        ExampleOutcome outcome;
        outcome.id = t.id;
        outcome.task = task_name(t.task);
        outcome.predicted = t.answer_stage.final;
        outcome.gold = t.gold;
        switch (t.task) {
            case Task::FactVerification: {
                ++fv_total;
                outcome.correct = !t.gold.empty() && outcome.predicted == fold(t.gold.front());
                fv_correct += outcome.correct ? 1u : 0u;
                break;
            }
            case Task::QuestionAnswering: {
                ++qa_total;
                outcome.correct =
                    metrics::denotation_match(metrics::split_values(outcome.predicted), t.gold);
                qa_correct += outcome.correct ? 1u : 0u;
                break;
            }
            case Task::FreeForm: {
                ++free_total;
                corpus_bleu.add(outcome.predicted, t.gold);
                metrics::RougeScores r =
                    metrics::rouge(outcome.predicted, t.gold.empty() ? "" : t.gold.front());
                rouge1_sum += r.rouge1;
                rouge2_sum += r.rouge2;
                rougeL_sum += r.rougeL;
                outcome.scores["bleu"] = metrics::bleu(outcome.predicted, t.gold);
                outcome.scores["rouge1"] = r.rouge1;
                outcome.scores["rouge2"] = r.rouge2;
                outcome.scores["rougeL"] = r.rougeL;
                outcome.correct = !t.gold.empty() && metrics::normalize_value(outcome.predicted) ==
                                                         metrics::normalize_value(t.gold.front());
                break;
            }
        }
        report.outcomes.push_back(std::move(outcome));
    }

    if (fv_total > 0)
        report.metrics["fv_accuracy"] =
            static_cast<double>(fv_correct) / static_cast<double>(fv_total);
    if (qa_total > 0)
        report.metrics["qa_denotation_accuracy"] =
            static_cast<double>(qa_correct) / static_cast<double>(qa_total);
    if (free_total > 0) {
        report.metrics["bleu"] = corpus_bleu.score();
        report.metrics["rouge1"] = rouge1_sum / static_cast<double>(free_total);
        report.metrics["rouge2"] = rouge2_sum / static_cast<double>(free_total);
        report.metrics["rougeL"] = rougeL_sum / static_cast<double>(free_total);
    }
    if (!ordered.empty()) {
        report.mean_cells_before = cells_before / static_cast<double>(ordered.size());
        report.mean_cells_after = cells_after / static_cast<double>(ordered.size());
        if (report.mean_cells_after > 0)
            report.reduction_factor = report.mean_cells_before / report.mean_cells_after;
    }
    return report;
}

std::string report_to_json(const EvalReport& report) {
    json outcomes = json::array();
    for (const ExampleOutcome& o : report.outcomes)
        outcomes.push_back(json{{"id", o.id},
                                {"task", o.task},
                                {"predicted", o.predicted},
                                {"gold", o.gold},
                                {"correct", o.correct},
                                {"scores", o.scores}});
    json j{{"examples", report.examples},
           {"provider_errors", report.provider_errors},
           {"task_counts", report.task_counts},
           {"metrics", report.metrics},
           {"mean_cells_before", report.mean_cells_before},
           {"mean_cells_after", report.mean_cells_after},
           {"reduction_factor", report.reduction_factor},
           {"outcomes", outcomes},
           {"notes", report.notes}};
    return j.dump(2) + "\n";
}

void write_report(const EvalReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw StorageFailure("cannot open " + path + " for writing");
    out << report_to_json(report);
    if (!out.flush()) throw StorageFailure("failed writing " + path);
}

std::vector<DecompositionTrace> run_pipeline(const RunConfig& config,
                                             const std::vector<Example>& examples,
                                             llm::Provider& provider,
                                             const StageExemplars& exemplars) {
    return run_examples(config, examples, provider, exemplars, StagePlan{});
}

std::vector<DecompositionTrace> run_evidence_stage(const RunConfig& config,
                                                   const std::vector<Example>& examples,
                                                   llm::Provider& provider,
                                                   const StageExemplars& exemplars) {
    return run_examples(config, examples, provider, exemplars,
                        StagePlan{.evidence = true, .question = false, .answer = false});
}

std::vector<DecompositionTrace> run_question_stage(const RunConfig& config,
                                                   const std::vector<Example>& examples,
                                                   llm::Provider& provider,
                                                   const StageExemplars& exemplars) {
    return run_examples(config, examples, provider, exemplars,
                        StagePlan{.evidence = false, .question = true, .answer = false});
}

std::vector<DecompositionTrace> run_answer_stage(const RunConfig& config,
                                                 const std::vector<Example>& examples,
                                                 const std::vector<DecompositionTrace>& prior,
                                                 llm::Provider& provider,
                                                 const StageExemplars& exemplars) {
    std::map<std::string, const DecompositionTrace*> by_id;
    for (const DecompositionTrace& t : prior) by_id[t.id] = &t;

    std::vector<DecompositionTrace> traces;
    for (const Example& ex : examples) {
        auto it = by_id.find(ex.id);
        if (it == by_id.end()) {
            std::cerr << "warning: no prior trace for example " << ex.id << ", skipping\n";
            continue;
        }
        DecompositionTrace trace = *it->second;
        Table sub = ex.table;
        if (!trace.evidence.skipped && !trace.evidence.rows.empty() &&
            !trace.evidence.cols.empty())
            sub = select_sub_table(
                ex.table, IndexSelection::normalized(trace.evidence.rows, trace.evidence.cols));
        BackfilledQuestion backfilled;
        backfilled.segments = trace.question_stage.backfilled.empty()
                                  ? std::vector<std::string>{ex.question}
                                  : trace.question_stage.backfilled;
        try {
            AnswerRecord record = answer(sub, backfilled, ex.question, provider, exemplars.joint,
                                         config.n_samples, config.temperature, ex.task);
            trace.answer_stage = answer_trace_from(record);
            trace.error.clear();
        } catch (const llm::ProviderError& e) {
            trace.error = e.what();
        }
        traces.push_back(std::move(trace));
    }
    std::sort(traces.begin(), traces.end(),
              [](const DecompositionTrace& a, const DecompositionTrace& b) { return a.id < b.id; });
    return traces;
}

std::string format_trace(const DecompositionTrace& trace) {
    std::ostringstream out;
    out << "id: " << trace.id << "\n"
        << "task: " << task_name(trace.task) << "\n"
        << "question: " << trace.question << "\n"
        << "gold: " << join(trace.gold, " | ") << "\n"
        << "cells: " << trace.cells_before << " -> " << trace.cells_after << "\n";
    if (!trace.error.empty()) out << "error: " << trace.error << "\n";

    out << "evidence:" << (trace.evidence.skipped ? " (skipped)" : "") << "\n";
    if (!trace.evidence.skipped) {
        out << "  rows: [" << join_ints(trace.evidence.rows) << "]\n"
            << "  cols: [" << join_ints(trace.evidence.cols) << "]\n";
        if (trace.evidence.fallback) out << "  fallback: full table kept\n";
        if (trace.evidence.truncated_rows > 0)
            out << "  prompt truncated to first " << trace.evidence.truncated_rows << " rows\n";
        for (const std::string& d : trace.evidence.dropped) out << "  dropped: " << d << "\n";
    }

    out << "question stage:" << (trace.question_stage.skipped ? " (skipped)" : "") << "\n";
    if (!trace.question_stage.skipped) {
        for (size_t i = 0; i < trace.question_stage.segments.size(); ++i)
            out << "  q" << (i + 1) << ": " << trace.question_stage.segments[i] << "\n";
        for (const QueryStatus& q : trace.question_stage.queries) {
            out << "  sql: " << q.text << " [" << q.status << "]";
            if (q.status == "ok") out << " -> " << q.result;
            else out << " (" << q.error << ")";
            out << "\n";
        }
        for (size_t i = 0; i < trace.question_stage.backfilled.size(); ++i)
            out << "  filled q" << (i + 1) << ": " << trace.question_stage.backfilled[i] << "\n";
        if (trace.question_stage.fallback) out << "  fallback: original question kept\n";
    }

    out << "answer:\n";
    for (const std::string& s : trace.answer_stage.samples) out << "  sample: " << s << "\n";
    for (const auto& [value, count] : trace.answer_stage.votes)
        out << "  vote: " << value << " x" << count << "\n";
    out << "  final: " << trace.answer_stage.final << "\n";
    if (trace.answer_stage.fallback) out << "  fallback: no sample mapped to a verdict\n";
    if (trace.answer_stage.tie_break) out << "  tie broken lexicographically\n";
    for (const auto& [stage, ms] : trace.timings_ms)
        out << "timing " << stage << ": " << ms << " ms\n";
    return out.str();
}

} // namespace dater
