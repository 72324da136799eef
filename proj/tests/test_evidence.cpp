#include <doctest.h>

#include <memory>

#include "dater/evidence.hpp"
#include "dater/fixtures.hpp"
#include "dater/provider.hpp"
#include "dater/table.hpp"

using namespace dater;

namespace {

Table games() {
    return Table("season",
                 {"date", "visitor", "score", "home"},
                 {{"jan 2", "minnesota", "3 - 1", "detroit"},
                  {"jan 5", "boston", "2 - 2", "minnesota"},
                  {"jan 9", "minnesota", "1 - 4", "chicago"}});
}

// Provider that always returns one fixed completion and records the prompts
// it was asked for.
struct FixedProvider : llm::Provider {
    std::string reply;
    std::vector<llm::CompletionRequest> seen;

    explicit FixedProvider(std::string r) : reply(std::move(r)) {}
    llm::CompletionResponse complete(const llm::CompletionRequest& request) override {
        seen.push_back(request);
        return llm::CompletionResponse{{reply}, "fixed", std::nullopt};
    }
};

} // namespace

TEST_CASE("evidence prompt layout") {
    Table t("small", {"a", "b"}, {{"1", "2"}, {"3", "4"}});
    std::vector<EvidenceExemplar> exemplars{
        {Table("ex", {"x", "y"}, {{"7", "8"}}), "which x?", IndexSelection::normalized({1}, {1})}};
    std::string prompt = build_evidence_prompt(t, "which b?", exemplars);
    CHECK(prompt ==
          "Select the rows and columns of the table that are needed to answer the question.\n"
          "Reply with two lines: ROWS: [row numbers, or *] and COLS: [column names, or *].\n"
          "\n"
          "caption : ex\n"
          "col : x | y\n"
          "row 1 : 7 | 8\n"
          "question : which x?\n"
          "answer:\n"
          "ROWS: [1]\n"
          "COLS: [x]\n"
          "\n"
          "caption : small\n"
          "col : a | b\n"
          "row 1 : 1 | 2\n"
          "row 2 : 3 | 4\n"
          "question : which b?\n"
          "answer:\n");
    CHECK_THROWS_AS(build_evidence_prompt(t, "q", {}), Error);
}

TEST_CASE("selection responses parse into sorted unique indexes") {
    Table t = games();
    IndexParse p = parse_index_response("ROWS: [3, 1, 3]\nCOLS: [home, visitor]", t);
    CHECK(p.selection.rows == std::vector<int>{1, 3});
    CHECK(p.selection.cols == std::vector<int>{2, 4});
    CHECK(p.dropped.empty());

    // Case-insensitive tags, no brackets, extra chatter before the answer.
    p = parse_index_response("sure!\nrows: 2\ncols: Home\nthanks", t);
    CHECK(p.selection.rows == std::vector<int>{2});
    CHECK(p.selection.cols == std::vector<int>{4});
}

TEST_CASE("wildcards select everything") {
    Table t = games();
    IndexParse p = parse_index_response("ROWS: [*]\nCOLS: [*]", t);
    CHECK(p.selection.is_full_for(t));
}

TEST_CASE("out-of-range and unknown entries are dropped but reported") {
    Table t = games();
    IndexParse p = parse_index_response("ROWS: [1, 9, x]\nCOLS: [visitor, nosuch]", t);
    CHECK(p.selection.rows == std::vector<int>{1});
    CHECK(p.selection.cols == std::vector<int>{2});
    CHECK(p.dropped == std::vector<std::string>{"row 9", "row x", "col nosuch"});
}

TEST_CASE("malformed responses raise typed errors") {
    Table t = games();
    CHECK_THROWS_AS(parse_index_response("the rows are 1 and 2", t), UnparseableSelection);
    CHECK_THROWS_AS(parse_index_response("ROWS: [1]", t), UnparseableSelection);
    CHECK_THROWS_AS(parse_index_response("ROWS: [99]\nCOLS: [visitor]", t), EmptySelection);
    CHECK_THROWS_AS(parse_index_response("ROWS: [1]\nCOLS: [nosuch]", t), EmptySelection);
    CHECK_THROWS_AS(parse_index_response("ROWS: []\nCOLS: [*]", t), EmptySelection);
}

TEST_CASE("decomposing evidence extracts the selected sub-table") {
    Table t = games();
    FixedProvider provider("ROWS: [1, 3]\nCOLS: [visitor, home]");
    EvidenceResult result =
        decompose_evidence(t, "how many visits?", provider, fixtures::evidence_exemplars(), 0);
    CHECK(result.sub_table.row_count() == 2);
    CHECK(result.sub_table.col_count() == 2);
    CHECK(result.trace.rows == std::vector<int>{1, 3});
    CHECK(result.trace.cols == std::vector<int>{2, 4});
    CHECK(!result.trace.fallback);
    CHECK(result.trace.truncated_rows == 0);

    // Decomposition stage always asks for a single greedy completion.
    REQUIRE(provider.seen.size() == 1);
    CHECK(provider.seen[0].temperature == 0.0);
    CHECK(provider.seen[0].n == 1);
    CHECK(provider.seen[0].stop == std::vector<std::string>{"\n\n"});
}

TEST_CASE("unusable responses fall back to the full table") {
    Table t = games();
    FixedProvider provider("no idea, sorry");
    EvidenceResult result =
        decompose_evidence(t, "how many visits?", provider, fixtures::evidence_exemplars(), 0);
    CHECK(result.trace.fallback);
    CHECK(result.sub_table == t);
    CHECK(result.selection.is_full_for(t));
}

TEST_CASE("oversized tables are truncated to fit the context budget") {
    // A tall table plus a small budget: the prompt must shrink to a row
    // prefix, and the chosen prefix length lands in the trace.
    std::vector<std::vector<std::string>> rows;
    for (int r = 0; r < 50; ++r)
        rows.push_back({"row-" + std::to_string(r), std::to_string(r)});
    Table tall("tall", {"name", "value"}, rows);

    FixedProvider provider("ROWS: [1]\nCOLS: [name]");
    std::vector<EvidenceExemplar> exemplars{
        {Table("ex", {"x"}, {{"1"}}), "which x?", IndexSelection::normalized({1}, {1})}};

    size_t full_size = build_evidence_prompt(tall, "q?", exemplars).size();
    size_t budget = full_size - 200;
    EvidenceResult result = decompose_evidence(tall, "q?", provider, exemplars, budget);
    CHECK(result.trace.truncated_rows > 0);
    CHECK(result.trace.truncated_rows < 50);
    CHECK(provider.seen.at(0).prompt.size() <= budget);

    // Budget too small for even one row: a context overflow, not a clipped
    // prompt.
    CHECK_THROWS_AS(decompose_evidence(tall, "q?", provider, exemplars, 50),
                    llm::ContextOverflow);
}
