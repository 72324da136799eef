#include "dater/config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dater/dataset.hpp"
#include "dater/text.hpp"

namespace dater {

using namespace text;

namespace {

bool parse_bool(const std::string& value, const std::string& key) {
    std::string v = fold(value);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config key " + key + " expects a boolean, got \"" + value + "\"");
}

double parse_double(const std::string& value, const std::string& key) {
    try {
        size_t used = 0;
        double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + " expects a number, got \"" + value + "\"");
    }
}

long parse_long(const std::string& value, const std::string& key) {
    try {
        size_t used = 0;
        long v = std::stol(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + " expects an integer, got \"" + value + "\"");
    }
}

} // namespace

void RunConfig::validate() const {
    if (n_samples < 1) throw ConfigError("n_samples must be >= 1");
    if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
    if (rate_limit_rpm <= 0) throw ConfigError("rate_limit_rpm must be positive");
    if (provider != "replay" && provider != "http")
        throw ConfigError("provider must be replay or http, got \"" + provider + "\"");
    try {
        dataset_format_from_name(format);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    for (const std::string& path :
         {evidence_exemplars, cloze_exemplars, sql_exemplars, joint_exemplars})
        if (!path.empty() && !std::filesystem::exists(path))
            throw ConfigError("exemplar file does not exist: " + path);
}

RunConfig parse_config(const std::string& content, const std::string& origin) {
    RunConfig config;
    std::istringstream in(content);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::string t = trim(line);
        if (t.empty()) continue;
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(line_no) +
                              ": expected key = value, got \"" + t + "\"");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));

        if (key == "provider") config.provider = value;
        else if (key == "endpoint") config.endpoint = value;
        else if (key == "model") config.model = value;
        else if (key == "api_key_env") config.api_key_env = value;
        else if (key == "temperature") config.temperature = parse_double(value, key);
        else if (key == "n_samples") config.n_samples = static_cast<int>(parse_long(value, key));
        else if (key == "evidence_exemplars") config.evidence_exemplars = value;
        else if (key == "cloze_exemplars") config.cloze_exemplars = value;
        else if (key == "sql_exemplars") config.sql_exemplars = value;
        else if (key == "joint_exemplars") config.joint_exemplars = value;
        else if (key == "context_budget_chars")
            config.context_budget_chars = static_cast<size_t>(parse_long(value, key));
        else if (key == "parallelism") config.parallelism = static_cast<int>(parse_long(value, key));
        else if (key == "rate_limit_rpm") config.rate_limit_rpm = parse_double(value, key);
        else if (key == "dataset") config.dataset = value;
        else if (key == "format") config.format = value;
        else if (key == "out_traces") config.out_traces = value;
        else if (key == "out_report") config.out_report = value;
        else if (key == "replay_store") config.replay_store = value;
        else if (key == "ablate_evidence") config.ablate_evidence = parse_bool(value, key);
        else if (key == "ablate_question") config.ablate_question = parse_bool(value, key);
        else if (key == "skip_invalid") config.skip_invalid = parse_bool(value, key);
        else if (key == "timings") config.timings = parse_bool(value, key);
        else
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": unknown config key \"" +
                              key + "\"");
    }
    return config;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), path);
}

} // namespace dater
