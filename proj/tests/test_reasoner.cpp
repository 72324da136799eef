#include <doctest.h>

#include <algorithm>
#include <random>

#include "dater/fixtures.hpp"
#include "dater/provider.hpp"
#include "dater/reasoner.hpp"
#include "dater/table.hpp"

using namespace dater;

TEST_CASE("task names round-trip") {
    for (Task task : {Task::FactVerification, Task::QuestionAnswering, Task::FreeForm})
        CHECK(task_from_name(task_name(task)) == task);
    CHECK_THROWS_AS(task_from_name("unknown"), Error);
}

TEST_CASE("joint prompt layout") {
    Table sub("small", {"a"}, {{"1"}});
    std::vector<JointExemplar> exemplars{
        {Table("ex", {"x"}, {{"9"}}), {"there are {9} x."}, "how many x?", "9"}};
    BackfilledQuestion backfilled;
    backfilled.segments = {"the a is {1}."};
    CHECK(build_joint_prompt(sub, backfilled, "what is a?", exemplars) ==
          "Answer the question using the table and the sub-questions. Finish with one line: "
          "A: <answer>.\n"
          "\n"
          "caption : ex\n"
          "col : x\n"
          "row 1 : 9\n"
          "sub-questions:\n"
          "q1: there are {9} x.\n"
          "question : how many x?\n"
          "A: 9\n"
          "\n"
          "caption : small\n"
          "col : a\n"
          "row 1 : 1\n"
          "sub-questions:\n"
          "q1: the a is {1}.\n"
          "question : what is a?\n"
          "A:");

    // With no sub-questions the question itself stands in.
    BackfilledQuestion empty;
    std::string prompt = build_joint_prompt(sub, empty, "what is a?", exemplars);
    CHECK(prompt.find("q1: what is a?") != std::string::npos);
}

TEST_CASE("answer extraction on hand-labeled completions") {
    // 20 hand-labeled (completion, expected) pairs covering chatter
    // prefixes, numerals, punctuation and casing.
    const std::vector<std::pair<std::string, std::string>> qa_cases = {
        {" 5", "5"},
        {"The answer is 5.", "5"},
        {"A: 12", "12"},
        {"So the final answer is no more than six", "no more than six"},
        {"Answer: 1,234", "1234"},
        {"the answer to the question is 3.50", "3.5"},
        {"Therefore, the answer is Chicago.", "chicago"},
        {"final answer: the answer is yes", "yes"},
        {"  TRUE  ", "true"},
        {"$7", "7"},
        {"minnesota  north   stars", "minnesota north stars"},
        {"A:", "a:"},
        {"The answer is.", ""},
        {"the answer island", "the answer island"},
        {"42 years", "42 years"},
        {"0042", "42"},
        {"3 - 1", "3 - 1"},
    };
    for (const auto& [completion, expected] : qa_cases) {
        CAPTURE(completion);
        CHECK(normalize_answer(completion, Task::QuestionAnswering) == expected);
    }

    CHECK(normalize_answer("Yes.", Task::FactVerification) == "yes");
    CHECK(normalize_answer(" FALSE", Task::FactVerification) == "no");
    CHECK_THROWS_AS(normalize_answer("definitely!", Task::FactVerification),
                    UnmappableFvAnswer);
}

TEST_CASE("plurality voting with numeric canonicalization") {
    AnswerRecord record =
        vote({" 5", "5.0", "the answer is 5.", " 4", "five"}, Task::QuestionAnswering);
    CHECK(record.final == "5");
    CHECK(record.normalized_votes.at("5") == 3);
    CHECK(record.normalized_votes.at("4") == 1);
    CHECK(record.normalized_votes.at("five") == 1);
    CHECK(!record.tie_break_applied);
    CHECK(record.discarded == 0);
}

TEST_CASE("fact verification voting discards unmappable samples") {
    AnswerRecord record = vote({" yes", "uh", " TRUE", "maybe so", " no"},
                               Task::FactVerification);
    CHECK(record.final == "yes");
    CHECK(record.discarded == 2);
    CHECK(record.normalized_votes.at("yes") == 2);
    CHECK(record.normalized_votes.at("no") == 1);

    AnswerRecord hopeless = vote({"dunno", "hard to say"}, Task::FactVerification);
    CHECK(hopeless.final == "no");
    CHECK(hopeless.fallback_used);
    CHECK(hopeless.discarded == 2);
}

TEST_CASE("ties break to the lexicographically smallest answer") {
    AnswerRecord record = vote({"b", "a", "b", "a"}, Task::QuestionAnswering);
    CHECK(record.final == "a");
    CHECK(record.tie_break_applied);

    record = vote({"zebra", "ant"}, Task::QuestionAnswering);
    CHECK(record.final == "ant");
    CHECK(record.tie_break_applied);
}

TEST_CASE("free-form answers keep the first sample verbatim") {
    AnswerRecord record =
        vote({"  The first flight was in 1903.  ", "1903"}, Task::FreeForm);
    CHECK(record.final == "The first flight was in 1903.");
    CHECK(!record.tie_break_applied);
    // Votes are still tabulated for the trace.
    CHECK(record.normalized_votes.size() == 2);
}

TEST_CASE("voting properties over randomized sample lists") {
    // 1,000 random lists: the outcome ignores sample order, ties resolve
    // deterministically, and fact verification always lands in {yes, no}.
    std::mt19937 rng(90210u);
    static const char* kPool[] = {" yes", "no",   " TRUE", "false", " 5",  "5.0",
                                  " the answer is 5.", " 4",  "maybe", "zebra", "ant", ""};
    for (int trial = 0; trial < 1000; ++trial) {
        Task task = trial % 2 == 0 ? Task::FactVerification : Task::QuestionAnswering;
        size_t count = 1 + rng() % 7;
        std::vector<std::string> samples;
        for (size_t i = 0; i < count; ++i) samples.push_back(kPool[rng() % 12]);

        AnswerRecord base = vote(samples, task);
        if (task == Task::FactVerification) {
            CHECK((base.final == "yes" || base.final == "no"));
        }

        std::vector<std::string> shuffled = samples;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        AnswerRecord again = vote(shuffled, task);
        CHECK(again.final == base.final);
        CHECK(again.normalized_votes == base.normalized_votes);
        CHECK(again.discarded == base.discarded);
        CHECK(again.fallback_used == base.fallback_used);

        // Re-running the identical list is bit-for-bit stable.
        AnswerRecord repeat = vote(samples, task);
        CHECK(repeat.final == base.final);
        CHECK(repeat.tie_break_applied == base.tie_break_applied);
    }
}

TEST_CASE("the answer stage passes sampling knobs through to the provider") {
    struct CountingProvider : llm::Provider {
        llm::CompletionRequest last;
        llm::CompletionResponse complete(const llm::CompletionRequest& request) override {
            last = request;
            return llm::CompletionResponse{
                std::vector<std::string>(static_cast<size_t>(request.n), " yes"), "t",
                std::nullopt};
        }
    };
    CountingProvider provider;
    Table sub("small", {"a"}, {{"1"}});
    BackfilledQuestion backfilled;
    backfilled.segments = {"the a is {1}."};
    AnswerRecord record = answer(sub, backfilled, "is a 1?", provider,
                                 fixtures::joint_exemplars_fv(), 5, 0.7,
                                 Task::FactVerification);
    CHECK(record.final == "yes");
    CHECK(provider.last.n == 5);
    CHECK(provider.last.temperature == 0.7);
    CHECK(provider.last.stop == std::vector<std::string>{"\n\n"});
    CHECK_THROWS_AS(answer(sub, backfilled, "q", provider, fixtures::joint_exemplars_fv(), 0,
                           0.7, Task::FactVerification),
                    Error);
}
