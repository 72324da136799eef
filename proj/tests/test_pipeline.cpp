#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "dater/fixtures.hpp"
#include "dater/pipeline.hpp"
#include "support/temp_dir.hpp"

using namespace dater;
using testsupport::TempDir;
using testsupport::read_file;
using testsupport::write_file;

namespace {

const char* kQaQuestion = "how many listings are in barrington and rochester in total?";
const char* kFvQuestion = "rochester has more listings than barrington";
const char* kBoomQuestion = "this one explodes";

Table listings_table() {
    return Table("listings by city", {"city", "listings"},
                 {{"barrington", "1"}, {"farmington", "1"}, {"rochester", "3"}});
}

std::vector<Example> pipeline_examples() {
    Example qa{"qa-1", Task::QuestionAnswering, listings_table(), kQaQuestion, {"4"}};
    Example fv{"fv-2", Task::FactVerification, listings_table(), kFvQuestion, {"yes"}};
    Example boom{"err-3", Task::FactVerification, listings_table(), kBoomQuestion, {"yes"}};
    return {qa, fv, boom};
}

StageExemplars tiny_exemplars() {
    Table t("", {"a"}, {{"1"}});
    StageExemplars xs;
    xs.evidence = {EvidenceExemplar{t, "what is a?", IndexSelection::normalized({1}, {1})}};
    xs.cloze = {ClozeExemplar{t, "what is a?", {"what is {...}?"}}};
    xs.sql = {SqlExemplar{t, {"what is {...}?"}, {"SELECT a FROM w"}}};
    xs.joint = {JointExemplar{t, {"what is 1?"}, "what is a?", "1"}};
    return xs;
}

// Answers each stage prompt by recognizing the instruction header and the
// question embedded in the prompt. Thread-safe so parallel runs can share it.
struct ScriptedPipelineProvider : llm::Provider {
    struct Call {
        std::string kind;
        llm::CompletionRequest request;
    };
    std::vector<Call> calls;
    std::mutex mutex;

    std::vector<Call> calls_of(const std::string& kind) {
        std::lock_guard<std::mutex> lock(mutex);
        std::vector<Call> out;
        for (const Call& c : calls)
            if (c.kind == kind) out.push_back(c);
        return out;
    }

    llm::CompletionResponse complete(const llm::CompletionRequest& request) override {
        const std::string& p = request.prompt;
        auto has = [&p](const std::string& s) { return p.find(s) != std::string::npos; };
        std::string kind;
        std::vector<std::string> samples;
        if (p.rfind("Select the rows", 0) == 0) {
            kind = "evidence";
            if (has(kBoomQuestion)) {
                std::lock_guard<std::mutex> lock(mutex);
                calls.push_back({kind, request});
                throw llm::ProviderUnavailable("scripted outage");
            }
            samples = {has(kQaQuestion) ? "ROWS: [1, 3]\nCOLS: [city, listings]"
                                        : "ROWS: [*]\nCOLS: [*]"};
        } else if (p.rfind("Rewrite the question", 0) == 0) {
            kind = "cloze";
            samples = {has(kQaQuestion)
                           ? "q1: barrington has {...} listings\n"
                             "q2: rochester has {...} listings\n"
                             "q3: how many in total?"
                           : "i cannot split this"};
        } else if (p.rfind("Write one SQL query", 0) == 0) {
            kind = "sql";
            samples = {"s1: SELECT listings FROM w WHERE city = 'barrington'\n"
                       "s2: SELECT listings FROM w WHERE city = 'rochester'"};
        } else if (p.rfind("Answer the question", 0) == 0) {
            kind = "joint";
            std::vector<std::string> one = has(kQaQuestion)
                                               ? std::vector<std::string>{"A: 4", " 4",
                                                                          "the answer is 4."}
                                               : std::vector<std::string>{"yes", "Yes.", "unclear"};
            for (int i = 0; i < request.n; ++i)
                samples.push_back(one[static_cast<size_t>(i) % one.size()]);
        } else {
            throw llm::ProviderUnavailable("unrecognized prompt: " + p.substr(0, 60));
        }
        {
            std::lock_guard<std::mutex> lock(mutex);
            calls.push_back({kind, request});
        }
        return llm::CompletionResponse{samples, "scripted", std::nullopt};
    }
};

const DecompositionTrace& trace_by_id(const std::vector<DecompositionTrace>& traces,
                                      const std::string& id) {
    for (const DecompositionTrace& t : traces)
        if (t.id == id) return t;
    static DecompositionTrace missing;
    FAIL("no trace with id " << id);
    return missing;
}

DecompositionTrace eval_trace(const std::string& id, Task task, const std::string& final,
                              std::vector<std::string> gold, size_t before = 20,
                              size_t after = 5) {
    DecompositionTrace t;
    t.id = id;
    t.task = task;
    t.question = "question for " + id;
    t.gold = std::move(gold);
    t.cells_before = before;
    t.cells_after = after;
    t.answer_stage.final = final;
    return t;
}

} // namespace

TEST_CASE("exemplar files survive a write/load round-trip") {
    TempDir dir;
    Table t("caption", {"name", "points"}, {{"ann", "3"}, {"bob", "5"}});

    std::vector<EvidenceExemplar> evidence = {
        EvidenceExemplar{t, "who scored 3?", IndexSelection::normalized({1}, {1, 2})}};
    write_evidence_exemplars(evidence, dir.file("evidence.json"));
    std::vector<EvidenceExemplar> evidence2 = load_evidence_exemplars(dir.file("evidence.json"));
    REQUIRE(evidence2.size() == 1);
    CHECK(evidence2[0].table == t);
    CHECK(evidence2[0].question == "who scored 3?");
    CHECK(evidence2[0].selection == evidence[0].selection);

    std::vector<ClozeExemplar> cloze = {ClozeExemplar{t, "q?", {"a {...}", "b {...}"}}};
    write_cloze_exemplars(cloze, dir.file("cloze.json"));
    std::vector<ClozeExemplar> cloze2 = load_cloze_exemplars(dir.file("cloze.json"));
    REQUIRE(cloze2.size() == 1);
    CHECK(cloze2[0].table == t);
    CHECK(cloze2[0].sub_questions == cloze[0].sub_questions);

    std::vector<SqlExemplar> sql = {
        SqlExemplar{t, {"a {...}"}, {"SELECT points FROM w WHERE name = 'ann'"}}};
    write_sql_exemplars(sql, dir.file("sql.json"));
    std::vector<SqlExemplar> sql2 = load_sql_exemplars(dir.file("sql.json"));
    REQUIRE(sql2.size() == 1);
    CHECK(sql2[0].queries == sql[0].queries);

    std::vector<JointExemplar> joint = {JointExemplar{t, {"a 3"}, "q?", "3"}};
    write_joint_exemplars(joint, dir.file("joint.json"));
    std::vector<JointExemplar> joint2 = load_joint_exemplars(dir.file("joint.json"));
    REQUIRE(joint2.size() == 1);
    CHECK(joint2[0].question == "q?");
    CHECK(joint2[0].answer == "3");

    SUBCASE("empty or non-array exemplar files are rejected") {
        write_file(dir.file("empty.json"), "[]");
        CHECK_THROWS_WITH_AS(static_cast<void>(load_joint_exemplars(dir.file("empty.json"))),
                             doctest::Contains("empty"), SchemaError);
        write_file(dir.file("object.json"), "{}");
        CHECK_THROWS_AS(static_cast<void>(load_cloze_exemplars(dir.file("object.json"))),
                        SchemaError);
        CHECK_THROWS_AS(static_cast<void>(load_sql_exemplars(dir.file("absent.json"))),
                        StorageFailure);
    }
}

TEST_CASE("load_exemplars enforces the paths each enabled stage needs") {
    TempDir dir;
    Table t("", {"a"}, {{"1"}});
    write_evidence_exemplars({EvidenceExemplar{t, "q?", IndexSelection::normalized({1}, {1})}},
                             dir.file("evidence.json"));
    write_cloze_exemplars({ClozeExemplar{t, "q?", {"a {...}"}}}, dir.file("cloze.json"));
    write_sql_exemplars({SqlExemplar{t, {"a {...}"}, {"SELECT a FROM w"}}}, dir.file("sql.json"));
    write_joint_exemplars({JointExemplar{t, {"a 1"}, "q?", "1"}}, dir.file("joint.json"));

    RunConfig config;
    config.joint_exemplars = dir.file("joint.json");

    SUBCASE("full pipeline needs all four files") {
        CHECK_THROWS_WITH_AS(static_cast<void>(load_exemplars(config)),
                             doctest::Contains("evidence_exemplars"), ConfigError);
        config.evidence_exemplars = dir.file("evidence.json");
        CHECK_THROWS_WITH_AS(static_cast<void>(load_exemplars(config)),
                             doctest::Contains("cloze_exemplars"), ConfigError);
        config.cloze_exemplars = dir.file("cloze.json");
        config.sql_exemplars = dir.file("sql.json");
        StageExemplars xs = load_exemplars(config);
        CHECK(xs.evidence.size() == 1);
        CHECK(xs.cloze.size() == 1);
        CHECK(xs.sql.size() == 1);
        CHECK(xs.joint.size() == 1);
    }
    SUBCASE("ablations drop the stage requirements") {
        config.ablate_evidence = true;
        config.ablate_question = true;
        StageExemplars xs = load_exemplars(config);
        CHECK(xs.evidence.empty());
        CHECK(xs.cloze.empty());
        CHECK(xs.joint.size() == 1);
    }
    SUBCASE("the joint stage is always required") {
        config.ablate_evidence = true;
        config.ablate_question = true;
        config.joint_exemplars.clear();
        CHECK_THROWS_WITH_AS(static_cast<void>(load_exemplars(config)),
                             doctest::Contains("joint_exemplars"), ConfigError);
    }
}

TEST_CASE("run_pipeline fills traces end to end") {
    RunConfig config;
    config.n_samples = 3;
    StageExemplars xs = tiny_exemplars();
    ScriptedPipelineProvider provider;
    std::vector<DecompositionTrace> traces =
        run_pipeline(config, pipeline_examples(), provider, xs);
    REQUIRE(traces.size() == 3);
    CHECK(std::is_sorted(traces.begin(), traces.end(),
                         [](const DecompositionTrace& a, const DecompositionTrace& b) {
                             return a.id < b.id;
                         }));

    const DecompositionTrace& qa = trace_by_id(traces, "qa-1");
    CHECK(qa.error.empty());
    CHECK(qa.cells_before == 6);
    CHECK(qa.cells_after == 4);
    CHECK(qa.evidence.rows == std::vector<int>{1, 3});
    CHECK(qa.evidence.cols == std::vector<int>{1, 2});
    CHECK_FALSE(qa.evidence.fallback);
    CHECK(qa.question_stage.placeholders == 2);
    REQUIRE(qa.question_stage.queries.size() == 2);
    CHECK(qa.question_stage.queries[0].status == "ok");
    CHECK(qa.question_stage.queries[0].result == "1");
    CHECK(qa.question_stage.queries[1].result == "3");
    CHECK(qa.question_stage.backfilled ==
          std::vector<std::string>{"barrington has {1} listings", "rochester has {3} listings",
                                   "how many in total?"});
    CHECK(qa.answer_stage.final == "4");
    CHECK(qa.answer_stage.votes.at("4") == 3);

    const DecompositionTrace& fv = trace_by_id(traces, "fv-2");
    CHECK(fv.error.empty());
    CHECK(fv.cells_after == 6); // wildcard selection keeps the full table
    CHECK(fv.evidence.rows == std::vector<int>{1, 2, 3});
    CHECK(fv.question_stage.fallback); // cloze was unusable
    CHECK(fv.question_stage.placeholders == 0);
    CHECK(fv.question_stage.backfilled == std::vector<std::string>{kFvQuestion});
    CHECK(fv.answer_stage.final == "yes");
    CHECK(fv.answer_stage.discarded == 1);

    const DecompositionTrace& boom = trace_by_id(traces, "err-3");
    CHECK(boom.error.find("scripted outage") != std::string::npos);
    CHECK(boom.answer_stage.samples.empty());
    CHECK(boom.cells_after == 6); // full table still counted after the abort

    SUBCASE("decomposition stages pin temperature 0 and one sample") {
        for (const char* kind : {"evidence", "cloze", "sql"}) {
            for (const auto& call : provider.calls_of(kind)) {
                CHECK(call.request.temperature == 0.0);
                CHECK(call.request.n == 1);
                CHECK(call.request.max_tokens == 512);
                CHECK(call.request.stop == std::vector<std::string>{"\n\n"});
            }
        }
        CHECK(provider.calls_of("evidence").size() == 3); // includes the failing call
        CHECK(provider.calls_of("cloze").size() == 2);
        CHECK(provider.calls_of("sql").size() == 1); // fv's fallback skips SQL
    }
    SUBCASE("the answer stage uses the configured sampling parameters") {
        auto joints = provider.calls_of("joint");
        REQUIRE(joints.size() == 2);
        for (const auto& call : joints) {
            CHECK(call.request.temperature == doctest::Approx(config.temperature));
            CHECK(call.request.n == config.n_samples);
        }
    }
    SUBCASE("parallel execution returns byte-identical results") {
        RunConfig parallel = config;
        parallel.parallelism = 4;
        ScriptedPipelineProvider provider2;
        std::vector<DecompositionTrace> traces2 =
            run_pipeline(parallel, pipeline_examples(), provider2, xs);
        REQUIRE(traces2.size() == traces.size());
        for (size_t i = 0; i < traces.size(); ++i) CHECK(traces2[i] == traces[i]);
        CHECK(report_to_json(evaluate(traces2)) == report_to_json(evaluate(traces)));
    }
}

TEST_CASE("ablation flags skip stages") {
    RunConfig config;
    config.n_samples = 3;
    StageExemplars xs = tiny_exemplars();
    std::vector<Example> examples = {pipeline_examples()[0]}; // qa-1 only

    SUBCASE("ablate_evidence keeps the full table") {
        config.ablate_evidence = true;
        ScriptedPipelineProvider provider;
        std::vector<DecompositionTrace> traces = run_pipeline(config, examples, provider, xs);
        REQUIRE(traces.size() == 1);
        CHECK(traces[0].evidence.skipped);
        CHECK(traces[0].cells_after == traces[0].cells_before);
        CHECK(provider.calls_of("evidence").empty());
        CHECK_FALSE(provider.calls_of("sql").empty());
    }
    SUBCASE("ablate_question keeps the original question") {
        config.ablate_question = true;
        ScriptedPipelineProvider provider;
        std::vector<DecompositionTrace> traces = run_pipeline(config, examples, provider, xs);
        REQUIRE(traces.size() == 1);
        CHECK(traces[0].question_stage.skipped);
        CHECK(traces[0].question_stage.backfilled == std::vector<std::string>{kQaQuestion});
        CHECK(provider.calls_of("cloze").empty());
        CHECK(provider.calls_of("sql").empty());
        CHECK_FALSE(provider.calls_of("evidence").empty());
    }
    SUBCASE("both ablations leave only the answer stage") {
        config.ablate_evidence = true;
        config.ablate_question = true;
        ScriptedPipelineProvider provider;
        std::vector<DecompositionTrace> traces = run_pipeline(config, examples, provider, xs);
        REQUIRE(traces.size() == 1);
        CHECK(traces[0].evidence.skipped);
        CHECK(traces[0].question_stage.skipped);
        CHECK(provider.calls.size() == provider.calls_of("joint").size());
        CHECK(traces[0].answer_stage.final == "4");
    }
}

TEST_CASE("run_answer_stage reuses prior decompositions") {
    RunConfig config;
    config.n_samples = 3;
    StageExemplars xs = tiny_exemplars();
    ScriptedPipelineProvider first;
    std::vector<DecompositionTrace> prior =
        run_pipeline(config, pipeline_examples(), first, xs);

    // A provider that answers only joint prompts, differently than before.
    struct JointOnly : llm::Provider {
        std::vector<std::string> prompts;
        llm::CompletionResponse complete(const llm::CompletionRequest& request) override {
            if (request.prompt.rfind("Answer the question", 0) != 0)
                throw llm::ProviderUnavailable("answer stage must not rerun decomposition");
            prompts.push_back(request.prompt);
            return llm::CompletionResponse{
                std::vector<std::string>(static_cast<size_t>(request.n), "A: 9"), "joint-only",
                std::nullopt};
        }
    } rerun;

    Example ghost{"ghost-9", Task::QuestionAnswering, listings_table(), "unseen?", {"1"}};
    std::vector<Example> examples = {pipeline_examples()[0], ghost};
    std::vector<DecompositionTrace> traces =
        run_answer_stage(config, examples, prior, rerun, xs);

    REQUIRE(traces.size() == 1); // ghost had no prior trace and is skipped
    CHECK(traces[0].id == "qa-1");
    CHECK(traces[0].answer_stage.final == "9");
    // Decomposition results are carried over unchanged.
    CHECK(traces[0].evidence.rows == std::vector<int>{1, 3});
    CHECK(traces[0].question_stage.backfilled ==
          trace_by_id(prior, "qa-1").question_stage.backfilled);

    // The rebuilt prompt used the stored sub-table and backfilled questions.
    REQUIRE(rerun.prompts.size() == 1);
    CHECK(rerun.prompts[0].find("row 1 : barrington | 1\nrow 2 : rochester | 3") !=
          std::string::npos);
    CHECK(rerun.prompts[0].find("q1: barrington has {1} listings") != std::string::npos);
}

TEST_CASE("evaluate scores traces per task") {
    std::vector<DecompositionTrace> traces = {
        eval_trace("a-fv-hit", Task::FactVerification, "yes", {"Yes"}),
        eval_trace("b-fv-miss", Task::FactVerification, "no", {"yes"}),
        eval_trace("c-qa-hit", Task::QuestionAnswering, "1, 3", {"3", "1"}),
        eval_trace("d-qa-miss", Task::QuestionAnswering, "5", {"4"}),
        eval_trace("e-free-hit", Task::FreeForm, "It premiered in 2016.",
                   {"It premiered in 2016."}),
        eval_trace("f-free-miss", Task::FreeForm, "no overlap at all",
                   {"something else entirely"}),
    };
    traces[3].error = "provider gave up";

    EvalReport report = evaluate(traces);
    CHECK(report.examples == 6);
    CHECK(report.provider_errors == 1);
    CHECK(report.task_counts.at("fv") == 2);
    CHECK(report.task_counts.at("qa") == 2);
    CHECK(report.task_counts.at("free") == 2);
    CHECK(report.metrics.at("fv_accuracy") == doctest::Approx(0.5));
    CHECK(report.metrics.at("qa_denotation_accuracy") == doctest::Approx(0.5));
    CHECK(report.metrics.at("rouge1") == doctest::Approx(0.5)); // perfect + zero, averaged
    CHECK(report.metrics.at("bleu") > 0.0);
    CHECK(report.mean_cells_before == doctest::Approx(20.0));
    CHECK(report.mean_cells_after == doctest::Approx(5.0));
    CHECK(report.reduction_factor == doctest::Approx(4.0));

    REQUIRE(report.outcomes.size() == 6);
    CHECK(std::is_sorted(report.outcomes.begin(), report.outcomes.end(),
                         [](const ExampleOutcome& a, const ExampleOutcome& b) {
                             return a.id < b.id;
                         }));
    CHECK(report.outcomes[0].correct);
    CHECK_FALSE(report.outcomes[1].correct);
    CHECK(report.outcomes[2].correct);
    CHECK(report.outcomes[4].correct);
    CHECK(report.outcomes[4].scores.at("bleu") == doctest::Approx(100.0));
    CHECK_FALSE(report.outcomes[5].correct);

    SUBCASE("the report is a pure function of the trace set") {
        std::vector<DecompositionTrace> shuffled = traces;
        std::mt19937 rng(7u);
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        CHECK(report_to_json(evaluate(shuffled)) == report_to_json(report));
    }
    SUBCASE("write_report emits the same bytes") {
        TempDir dir;
        write_report(report, dir.file("report.json"));
        CHECK(read_file(dir.file("report.json")) == report_to_json(report));
    }
}

TEST_CASE("format_trace shows the full reasoning chain") {
    RunConfig config;
    config.n_samples = 3;
    ScriptedPipelineProvider provider;
    std::vector<DecompositionTrace> traces =
        run_pipeline(config, {pipeline_examples()[0]}, provider, tiny_exemplars());
    REQUIRE(traces.size() == 1);
    std::string text = format_trace(traces[0]);
    CHECK(text.find("id: qa-1") != std::string::npos);
    CHECK(text.find("cells: 6 -> 4") != std::string::npos);
    CHECK(text.find("sql: SELECT listings FROM w WHERE city = 'barrington' [ok] -> 1") !=
          std::string::npos);
    CHECK(text.find("filled q1: barrington has {1} listings") != std::string::npos);
    CHECK(text.find("final: 4") != std::string::npos);
}

TEST_CASE("bundled fixtures match the generator byte for byte") {
    TempDir dir;
    RunConfig defaults;
    fixtures::write_fixtures(dir.file("data"), defaults.n_samples, defaults.temperature);

    namespace fs = std::filesystem;
    const fs::path repo(DATER_REPO_DATA_DIR);
    const fs::path fresh = dir.path / "data";
    size_t compared = 0;
    for (const auto& entry : fs::recursive_directory_iterator(repo)) {
        if (!entry.is_regular_file()) continue;
        fs::path rel = fs::relative(entry.path(), repo);
        INFO("fixture file ", rel.string());
        REQUIRE(fs::exists(fresh / rel));
        CHECK(read_file((fresh / rel).string()) == read_file(entry.path().string()));
        ++compared;
    }
    for (const auto& entry : fs::recursive_directory_iterator(fresh)) {
        if (!entry.is_regular_file()) continue;
        fs::path rel = fs::relative(entry.path(), fresh);
        INFO("generated file ", rel.string());
        CHECK(fs::exists(repo / rel));
    }
    CHECK(compared == 11);
}
