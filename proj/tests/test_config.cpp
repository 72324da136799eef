#include <doctest.h>

#include <string>

#include "dater/config.hpp"
#include "support/temp_dir.hpp"

using namespace dater;
using testsupport::TempDir;
using testsupport::write_file;

TEST_CASE("empty config keeps every default") {
    RunConfig config = parse_config("", "mem");
    CHECK(config.provider == "replay");
    CHECK(config.endpoint == "http://localhost:8089/v1");
    CHECK(config.model == "table-reasoner");
    CHECK(config.api_key_env == "LLM_API_KEY");
    CHECK(config.temperature == doctest::Approx(0.7));
    CHECK(config.n_samples == 5);
    CHECK(config.evidence_exemplars.empty());
    CHECK(config.context_budget_chars == 16000);
    CHECK(config.parallelism == 1);
    CHECK(config.rate_limit_rpm == doctest::Approx(60.0));
    CHECK(config.format == "canonical");
    CHECK(config.out_traces == "traces.jsonl");
    CHECK(config.out_report == "report.json");
    CHECK_FALSE(config.ablate_evidence);
    CHECK_FALSE(config.ablate_question);
    CHECK_FALSE(config.skip_invalid);
    CHECK_FALSE(config.timings);
    CHECK_NOTHROW(config.validate());
}

TEST_CASE("config keys override defaults; comments and blanks are ignored") {
    const std::string text = R"(
# full override
provider = http
endpoint = https://api.example.com/v1
model = big-model
api_key_env = MY_KEY
temperature = 0.2   # inline comment
n_samples = 9
context_budget_chars = 4000
parallelism = 4
rate_limit_rpm = 120.5
dataset = data/dev.jsonl
format = tabfact
out_traces = out/t.jsonl
out_report = out/r.json
replay_store = out/replay.jsonl
ablate_evidence = yes
ablate_question = ON
skip_invalid = 1
timings = true
)";
    RunConfig config = parse_config(text, "mem");
    CHECK(config.provider == "http");
    CHECK(config.endpoint == "https://api.example.com/v1");
    CHECK(config.model == "big-model");
    CHECK(config.api_key_env == "MY_KEY");
    CHECK(config.temperature == doctest::Approx(0.2));
    CHECK(config.n_samples == 9);
    CHECK(config.context_budget_chars == 4000);
    CHECK(config.parallelism == 4);
    CHECK(config.rate_limit_rpm == doctest::Approx(120.5));
    CHECK(config.dataset == "data/dev.jsonl");
    CHECK(config.format == "tabfact");
    CHECK(config.out_traces == "out/t.jsonl");
    CHECK(config.out_report == "out/r.json");
    CHECK(config.replay_store == "out/replay.jsonl");
    CHECK(config.ablate_evidence);
    CHECK(config.ablate_question);
    CHECK(config.skip_invalid);
    CHECK(config.timings);
}

TEST_CASE("boolean spellings") {
    for (const char* yes : {"true", "1", "yes", "on", "TRUE", "Yes"})
        CHECK(parse_config(std::string("timings = ") + yes, "mem").timings);
    for (const char* no : {"false", "0", "no", "off", "False", "OFF"})
        CHECK_FALSE(parse_config(std::string("timings = ") + no, "mem").timings);
    CHECK_THROWS_WITH_AS(static_cast<void>(parse_config("timings = maybe", "mem")),
                         doctest::Contains("timings"), ConfigError);
}

TEST_CASE("config parse errors name origin and line") {
    CHECK_THROWS_WITH_AS(static_cast<void>(parse_config("provider = http\nmystery = 1", "my.conf")),
                         doctest::Contains("my.conf:2"), ConfigError);
    CHECK_THROWS_WITH_AS(static_cast<void>(parse_config("\n\njust words", "my.conf")),
                         doctest::Contains("my.conf:3"), ConfigError);
    CHECK_THROWS_WITH_AS(static_cast<void>(parse_config("n_samples = five", "mem")),
                         doctest::Contains("n_samples"), ConfigError);
    CHECK_THROWS_WITH_AS(static_cast<void>(parse_config("temperature = warm", "mem")),
                         doctest::Contains("temperature"), ConfigError);
    CHECK_THROWS_WITH_AS(static_cast<void>(parse_config("n_samples = 5x", "mem")),
                         doctest::Contains("n_samples"), ConfigError);
}

TEST_CASE("validate rejects out-of-range values") {
    RunConfig base;

    RunConfig c = base;
    c.n_samples = 0;
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("n_samples"), ConfigError);

    c = base;
    c.parallelism = 0;
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("parallelism"), ConfigError);

    c = base;
    c.rate_limit_rpm = 0.0;
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("rate_limit_rpm"), ConfigError);

    c = base;
    c.provider = "carrier-pigeon";
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("provider"), ConfigError);

    c = base;
    c.format = "parquet";
    CHECK_THROWS_AS(c.validate(), ConfigError);

    c = base;
    c.joint_exemplars = "/nonexistent/exemplars.json";
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("exemplar file does not exist"),
                         ConfigError);
}

TEST_CASE("load_config reads a file and reports a missing one") {
    TempDir dir;
    const std::string path = dir.file("run.conf");
    write_file(path, "n_samples = 3\ntemperature = 0\n");
    RunConfig config = load_config(path);
    CHECK(config.n_samples == 3);
    CHECK(config.temperature == 0.0);

    CHECK_THROWS_WITH_AS(static_cast<void>(load_config(dir.file("absent.conf"))),
                         doctest::Contains("absent.conf"), ConfigError);
}
