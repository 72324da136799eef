#pragma once

#include <string>

#include "dater/errors.hpp"

namespace dater {

class ConfigError : public Error {
public:
    using Error::Error;
};

// Full run configuration. Everything lives in a key=value file so a run is
// reproducible from versioned text; only secrets come from the environment
// (via api_key_env). Defaults here are artifact choices, not values any
// benchmark mandates.
struct RunConfig {
    std::string provider = "replay"; // replay | http
    std::string endpoint = "http://localhost:8089/v1";
    std::string model = "table-reasoner";
    std::string api_key_env = "LLM_API_KEY";
    double temperature = 0.7; // joint-stage sampling; decomposition stages pin 0
    int n_samples = 5;        // completions voted over per example
    std::string evidence_exemplars;
    std::string cloze_exemplars;
    std::string sql_exemplars;
    std::string joint_exemplars;
    size_t context_budget_chars = 16000; // 0 = unlimited
    int parallelism = 1;
    double rate_limit_rpm = 60.0;
    std::string dataset;
    std::string format = "canonical"; // canonical | tabfact | wtq | fetaqa
    std::string out_traces = "traces.jsonl";
    std::string out_report = "report.json";
    std::string replay_store;
    bool ablate_evidence = false;
    bool ablate_question = false;
    bool skip_invalid = false;
    bool timings = false; // per-stage wall times in traces (breaks byte-level
                          // determinism across runs, so off by default)

    // Throws ConfigError when a constraint is broken (n_samples >= 1,
    // parallelism >= 1, provider/format known, exemplar files exist).
    void validate() const;
};

// key = value lines; '#' starts a comment; unknown keys are errors.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text, const std::string& origin);

} // namespace dater
