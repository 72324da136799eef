// Command-line entry point for the table-reasoning pipeline: full runs,
// single-stage runs, evaluation, trace inspection, fixture recording and
// generation.

#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dater/config.hpp"
#include "dater/dataset.hpp"
#include "dater/fixtures.hpp"
#include "dater/pipeline.hpp"
#include "dater/provider.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitProvider = 3;
constexpr int kExitDataset = 4;

struct CliOptions {
    std::string config_path;
    std::string dataset;
    std::string format;
    std::string out_traces;
    std::string out_report;
    std::string provider;
    std::string replay_store;
    std::string in_traces;
    std::string id_filter;
    bool ablate_evidence = false;
    bool ablate_question = false;
    bool skip_invalid = false;
    bool timings = false;
    int parallelism = 0;
};

void add_common_flags(CLI::App* cmd, CliOptions* opts) {
    cmd->add_option("--config", opts->config_path, "key=value configuration file");
    cmd->add_option("--dataset", opts->dataset, "dataset file to load");
    cmd->add_option("--format", opts->format, "dataset format: canonical|tabfact|wtq|fetaqa");
    cmd->add_option("--out-traces", opts->out_traces, "where to write JSONL traces");
    cmd->add_option("--out-report", opts->out_report, "where to write the evaluation report");
    cmd->add_option("--provider", opts->provider, "completion provider: replay|http");
    cmd->add_option("--replay-store", opts->replay_store, "replay store JSONL path");
    cmd->add_option("--parallelism", opts->parallelism, "worker threads");
    cmd->add_flag("--ablate-evidence", opts->ablate_evidence, "skip evidence decomposition");
    cmd->add_flag("--ablate-question", opts->ablate_question, "skip question decomposition");
    cmd->add_flag("--skip-invalid", opts->skip_invalid, "skip unloadable examples with a warning");
    cmd->add_flag("--timings", opts->timings, "record per-stage wall times in traces");
    cmd->add_option("--id", opts->id_filter, "process only the example with this id");
}

dater::RunConfig build_config(const CliOptions& opts) {
    dater::RunConfig config;
    if (!opts.config_path.empty()) config = dater::load_config(opts.config_path);
    if (!opts.dataset.empty()) config.dataset = opts.dataset;
    if (!opts.format.empty()) config.format = opts.format;
    if (!opts.out_traces.empty()) config.out_traces = opts.out_traces;
    if (!opts.out_report.empty()) config.out_report = opts.out_report;
    if (!opts.provider.empty()) config.provider = opts.provider;
    if (!opts.replay_store.empty()) config.replay_store = opts.replay_store;
    if (opts.parallelism > 0) config.parallelism = opts.parallelism;
    if (opts.ablate_evidence) config.ablate_evidence = true;
    if (opts.ablate_question) config.ablate_question = true;
    if (opts.skip_invalid) config.skip_invalid = true;
    if (opts.timings) config.timings = true;
    return config;
}

std::unique_ptr<dater::llm::Provider> make_provider(const dater::RunConfig& config,
                                                    bool record_mode) {
    using namespace dater::llm;
    if (record_mode || config.provider == "http") {
        HttpProviderConfig http;
        http.base_url = config.endpoint;
        http.model = config.model;
        http.api_key_env = config.api_key_env;
        http.context_budget_chars = config.context_budget_chars;
        http.requests_per_minute = config.rate_limit_rpm;
        if (!record_mode) return std::make_unique<HttpProvider>(http);
        if (config.replay_store.empty())
            throw dater::ConfigError("record mode needs --replay-store");
        auto live = std::make_shared<HttpProvider>(http);
        auto store = std::make_shared<ReplayStore>(config.replay_store);
        return std::make_unique<RecordingProvider>(live, store);
    }
    auto store = std::make_shared<ReplayStore>(config.replay_store);
    return std::make_unique<ReplayProvider>(store, config.context_budget_chars);
}

std::vector<dater::Example> load_examples(const dater::RunConfig& config,
                                          const std::string& id_filter) {
    if (config.dataset.empty()) throw dater::ConfigError("no dataset given (--dataset or config)");
    std::vector<dater::Example> examples = dater::load_dataset(
        config.dataset, dater::dataset_format_from_name(config.format), config.skip_invalid);
    if (!id_filter.empty()) {
        std::vector<dater::Example> filtered;
        for (const dater::Example& ex : examples)
            if (ex.id == id_filter) filtered.push_back(ex);
        if (filtered.empty())
            throw dater::SchemaError("no example with id \"" + id_filter + "\" in " +
                                     config.dataset);
        examples = filtered;
    }
    return examples;
}

enum class Stage { Full, Evidence, Question };

int run_stage_command(const CliOptions& opts, bool baseline, Stage stage, bool record_mode,
                      bool with_report) {
    dater::RunConfig config;
    dater::StageExemplars exemplars;
    try {
        config = build_config(opts);
        if (baseline) {
            config.ablate_evidence = true;
            config.ablate_question = true;
        }
        config.validate();
        if (stage == Stage::Evidence) config.ablate_question = true;
        if (stage == Stage::Question) config.ablate_evidence = true;
        exemplars = dater::load_exemplars(config);
    } catch (const dater::Error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    std::vector<dater::Example> examples;
    try {
        examples = load_examples(config, opts.id_filter);
    } catch (const dater::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const dater::Error& e) {
        std::cerr << "dataset error: " << e.what() << "\n";
        return kExitDataset;
    }

    try {
        std::unique_ptr<dater::llm::Provider> provider = make_provider(config, record_mode);
        std::vector<dater::DecompositionTrace> traces;
        switch (stage) {
            case Stage::Full:
                traces = dater::run_pipeline(config, examples, *provider, exemplars);
                break;
            case Stage::Evidence:
                traces = dater::run_evidence_stage(config, examples, *provider, exemplars);
                break;
            case Stage::Question:
                traces = dater::run_question_stage(config, examples, *provider, exemplars);
                break;
        }
        dater::write_traces(traces, config.out_traces);
        std::cout << "wrote " << traces.size() << " traces to " << config.out_traces << "\n";
        if (with_report) {
            dater::EvalReport report = dater::evaluate(traces);
            dater::write_report(report, config.out_report);
            std::cout << "wrote report to " << config.out_report << "\n";
        }
        for (const dater::DecompositionTrace& t : traces)
            if (!t.error.empty()) {
                std::cerr << "provider failure on example " << t.id << ": " << t.error << "\n";
                return kExitProvider;
            }
        return kExitOk;
    } catch (const dater::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const dater::llm::ProviderError& e) {
        std::cerr << "provider error: " << e.what() << "\n";
        return kExitProvider;
    } catch (const dater::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDataset;
    }
}

int cmd_answer(const CliOptions& opts) {
    dater::RunConfig config;
    dater::StageExemplars exemplars;
    try {
        config = build_config(opts);
        // Only the answer stage runs; decomposition exemplars are not needed.
        config.ablate_evidence = true;
        config.ablate_question = true;
        config.validate();
        exemplars = dater::load_exemplars(config);
        if (opts.in_traces.empty())
            throw dater::ConfigError("answer needs --in-traces with prior stage output");
    } catch (const dater::Error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    try {
        std::vector<dater::Example> examples = load_examples(config, opts.id_filter);
        std::vector<dater::DecompositionTrace> prior = dater::read_traces(opts.in_traces);
        std::unique_ptr<dater::llm::Provider> provider = make_provider(config, false);
        std::vector<dater::DecompositionTrace> traces =
            dater::run_answer_stage(config, examples, prior, *provider, exemplars);
        dater::write_traces(traces, config.out_traces);
        std::cout << "wrote " << traces.size() << " traces to " << config.out_traces << "\n";
        dater::EvalReport report = dater::evaluate(traces);
        dater::write_report(report, config.out_report);
        std::cout << "wrote report to " << config.out_report << "\n";
        for (const dater::DecompositionTrace& t : traces)
            if (!t.error.empty()) {
                std::cerr << "provider failure on example " << t.id << ": " << t.error << "\n";
                return kExitProvider;
            }
        return kExitOk;
    } catch (const dater::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const dater::llm::ProviderError& e) {
        std::cerr << "provider error: " << e.what() << "\n";
        return kExitProvider;
    } catch (const dater::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDataset;
    }
}

int cmd_eval(const CliOptions& opts) {
    try {
        if (opts.in_traces.empty())
            throw dater::ConfigError("eval needs --in-traces");
        dater::RunConfig config = build_config(opts);
        std::vector<dater::DecompositionTrace> traces = dater::read_traces(opts.in_traces);
        dater::EvalReport report = dater::evaluate(traces);
        dater::write_report(report, config.out_report);
        std::cout << "wrote report to " << config.out_report << "\n";
        return kExitOk;
    } catch (const dater::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const dater::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDataset;
    }
}

int cmd_inspect(const CliOptions& opts, const std::string& id) {
    try {
        if (opts.in_traces.empty())
            throw dater::ConfigError("inspect needs --in-traces");
        for (const dater::DecompositionTrace& t : dater::read_traces(opts.in_traces))
            if (t.id == id) {
                std::cout << dater::format_trace(t);
                return kExitOk;
            }
        std::cerr << "no trace with id \"" << id << "\" in " << opts.in_traces << "\n";
        return kExitDataset;
    } catch (const dater::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const dater::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDataset;
    }
}

int cmd_make_fixtures(const std::string& out_dir) {
    try {
        dater::RunConfig defaults;
        dater::fixtures::write_fixtures(out_dir, defaults.n_samples, defaults.temperature);
        std::cout << "wrote fixtures under " << out_dir << "\n";
        return kExitOk;
    } catch (const dater::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"table reasoning via evidence and question decomposition"};
    app.require_subcommand(1);

    CliOptions opts;
    std::string inspect_id;
    std::string fixtures_dir = "data";

    CLI::App* run = app.add_subcommand("run", "full pipeline over a dataset");
    add_common_flags(run, &opts);
    CLI::App* baseline =
        app.add_subcommand("baseline", "answer directly with no decomposition stages");
    add_common_flags(baseline, &opts);
    CLI::App* ev = app.add_subcommand("decompose-evidence", "run only the sub-table stage");
    add_common_flags(ev, &opts);
    CLI::App* qd = app.add_subcommand("decompose-question", "run only the sub-question stage");
    add_common_flags(qd, &opts);
    CLI::App* ans = app.add_subcommand("answer", "re-run the answer stage on prior traces");
    add_common_flags(ans, &opts);
    ans->add_option("--in-traces", opts.in_traces, "prior trace file");
    CLI::App* ev_cmd = app.add_subcommand("eval", "re-score an existing trace file");
    ev_cmd->add_option("--in-traces", opts.in_traces, "trace file to score")->required();
    ev_cmd->add_option("--out-report", opts.out_report, "where to write the report");
    ev_cmd->add_option("--config", opts.config_path, "key=value configuration file");
    CLI::App* ins = app.add_subcommand("inspect", "pretty-print one trace");
    ins->add_option("--in-traces", opts.in_traces, "trace file to search")->required();
    ins->add_option("id", inspect_id, "example id")->required();
    CLI::App* rec =
        app.add_subcommand("record", "run against the live provider, recording completions");
    add_common_flags(rec, &opts);
    CLI::App* fix = app.add_subcommand("make-fixtures", "regenerate the bundled fixture files");
    fix->add_option("--out", fixtures_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return run_stage_command(opts, false, Stage::Full, false, true);
    if (baseline->parsed()) return run_stage_command(opts, true, Stage::Full, false, true);
    if (ev->parsed()) return run_stage_command(opts, false, Stage::Evidence, false, false);
    if (qd->parsed()) return run_stage_command(opts, false, Stage::Question, false, false);
    if (ans->parsed()) return cmd_answer(opts);
    if (ev_cmd->parsed()) return cmd_eval(opts);
    if (ins->parsed()) return cmd_inspect(opts, inspect_id);
    if (rec->parsed()) return run_stage_command(opts, false, Stage::Full, true, true);
    if (fix->parsed()) return cmd_make_fixtures(fixtures_dir);
    std::cerr << "no subcommand\n";
    return kExitFailure;
}
