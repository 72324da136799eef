#include "dater/question.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <sstream>

#include "dater/text.hpp"

namespace dater {

using namespace text;

namespace {

constexpr const char* kClozeInstruction =
    "Rewrite the question as numbered sub-questions, masking every value that "
    "must be computed from the table with {...}.\n";

constexpr const char* kSqlInstruction =
    "Write one SQL query over table w for each {...} placeholder in the "
    "sub-questions, one query per line.\n";

size_t count_occurrences(const std::string& text, const std::string& token) {
    size_t n = 0;
    for (size_t pos = text.find(token); pos != std::string::npos;
         pos = text.find(token, pos + token.size()))
        ++n;
    return n;
}

std::string one_line(const std::string& text) {
    std::string flat = text;
    for (char& ch : flat)
        if (ch == '\n' || ch == '\r' || ch == '\t') ch = ' ';
    return collapse_spaces(trim(flat));
}

struct Marker {
    size_t pos;
    size_t end;
    long num;
};

std::vector<Marker> find_markers(const std::string& text) {
    std::vector<Marker> markers;
    for (size_t i = 0; i < text.size(); ++i) {
        if (text[i] != 'q' && text[i] != 'Q') continue;
        if (i != 0 && !std::isspace(static_cast<unsigned char>(text[i - 1]))) continue;
        size_t j = i + 1;
        while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
        if (j == i + 1 || j >= text.size() || text[j] != ':') continue;
        markers.push_back({i, j + 1, std::strtol(text.c_str() + i + 1, nullptr, 10)});
        i = j;
    }
    return markers;
}

// Strips an optional leading "sN:" / "qN:" marker from a line.
std::string strip_line_marker(const std::string& line) {
    if (line.size() < 3 || (line[0] != 's' && line[0] != 'S' && line[0] != 'q' && line[0] != 'Q'))
        return line;
    size_t j = 1;
    while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
    if (j == 1 || j >= line.size() || line[j] != ':') return line;
    return trim(line.substr(j + 1));
}

bool starts_with_select(const std::string& line) {
    static const std::string kw = "select";
    if (line.size() < kw.size()) return false;
    for (size_t i = 0; i < kw.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(line[i])) != kw[i]) return false;
    return true;
}

llm::CompletionRequest stage_request(std::string prompt) {
    llm::CompletionRequest req;
    req.prompt = std::move(prompt);
    req.temperature = 0.0;
    req.n = 1;
    req.max_tokens = 512;
    req.stop = {"\n\n"};
    return req;
}

} // namespace

size_t ClozeQuestion::placeholder_count() const {
    size_t n = 0;
    for (const std::string& s : segments) n += count_occurrences(s, kPlaceholder);
    return n;
}

std::string render_sub_questions(const std::vector<std::string>& segments) {
    std::ostringstream out;
    for (size_t i = 0; i < segments.size(); ++i)
        out << (i ? "\n" : "") << "q" << (i + 1) << ": " << segments[i];
    return out.str();
}

std::string build_cloze_prompt(const Table& table,
                               const std::string& question,
                               const std::vector<ClozeExemplar>& exemplars) {
    if (exemplars.empty())
        throw Error("cloze prompt requires at least one exemplar");
    std::ostringstream out;
    out << kClozeInstruction;
    for (const ClozeExemplar& ex : exemplars) {
        out << "\n" << linearize(ex.table)
            << "question : " << ex.question << "\n"
            << "sub-questions:\n"
            << render_sub_questions(ex.sub_questions) << "\n";
    }
    out << "\n" << linearize(table)
        << "question : " << question << "\n"
        << "sub-questions:\n";
    return out.str();
}

std::string build_sql_prompt(const Table& table,
                             const ClozeQuestion& cloze,
                             const std::vector<SqlExemplar>& exemplars) {
    if (exemplars.empty())
        throw Error("sql prompt requires at least one exemplar");
    std::ostringstream out;
    out << kSqlInstruction;
    for (const SqlExemplar& ex : exemplars) {
        out << "\n" << linearize(ex.table)
            << "sub-questions:\n"
            << render_sub_questions(ex.sub_questions) << "\n"
            << "sql:\n";
        for (const std::string& q : ex.queries) out << q << "\n";
    }
    out << "\n" << linearize(table)
        << "sub-questions:\n"
        << render_sub_questions(cloze.segments) << "\n"
        << "sql:\n";
    return out.str();
}

ClozeQuestion parse_cloze_response(const std::string& response) {
    std::vector<Marker> markers = find_markers(response);
    bool has_q1 = false;
    for (const Marker& m : markers) has_q1 = has_q1 || m.num == 1;
    if (markers.empty() || !has_q1)
        throw UnparseableCloze("response has no q1: line: " +
                               response.substr(0, std::min<size_t>(response.size(), 120)));
    ClozeQuestion cloze;
    for (size_t k = 0; k < markers.size(); ++k) {
        size_t begin = markers[k].end;
        size_t end = k + 1 < markers.size() ? markers[k + 1].pos : response.size();
        std::string segment = one_line(response.substr(begin, end - begin));
        if (!segment.empty()) cloze.segments.push_back(segment);
    }
    if (cloze.segments.empty())
        throw UnparseableCloze("every sub-question segment was empty");
    return cloze;
}

std::vector<SqlCandidate> parse_sql_response(const std::string& response,
                                             const Table& table,
                                             size_t expected) {
    std::vector<SqlCandidate> candidates;
    for (const std::string& line : split(response, '\n')) {
        std::string text = strip_line_marker(trim(line));
        if (!starts_with_select(text)) continue;
        SqlCandidate cand;
        cand.text = text;
        try {
            sql::parse_sql(text, table.normalized_headers());
        } catch (const sql::SqlError& e) {
            cand.parse_error = e.what();
        }
        candidates.push_back(std::move(cand));
    }
    if (candidates.size() != expected)
        throw CountMismatch("expected " + std::to_string(expected) + " SQL queries, found " +
                            std::to_string(candidates.size()));
    return candidates;
}

ClozeGeneration generate_cloze(const std::string& question,
                               const Table& table,
                               llm::Provider& provider,
                               const std::vector<ClozeExemplar>& exemplars) {
    llm::CompletionResponse resp =
        provider.complete(stage_request(build_cloze_prompt(table, question, exemplars)));
    ClozeGeneration gen;
    gen.raw_response = resp.samples.at(0);
    gen.cloze = parse_cloze_response(gen.raw_response);
    return gen;
}

SqlGeneration generate_sql(const ClozeQuestion& cloze,
                           const Table& table,
                           llm::Provider& provider,
                           const std::vector<SqlExemplar>& exemplars) {
    if (cloze.placeholder_count() == 0)
        throw Error("sql generation requires at least one placeholder");
    llm::CompletionResponse resp =
        provider.complete(stage_request(build_sql_prompt(table, cloze, exemplars)));
    SqlGeneration gen;
    gen.raw_response = resp.samples.at(0);
    gen.queries = parse_sql_response(gen.raw_response, table, cloze.placeholder_count());
    return gen;
}

BackfilledQuestion backfill(const ClozeQuestion& cloze, const std::vector<Fill>& fills) {
    if (fills.size() != cloze.placeholder_count())
        throw CountMismatch("backfill got " + std::to_string(fills.size()) + " fills for " +
                            std::to_string(cloze.placeholder_count()) + " placeholders");
    BackfilledQuestion back;
    back.fills = fills;
    size_t next = 0;
    const std::string token = kPlaceholder;
    for (const std::string& segment : cloze.segments) {
        std::string out;
        size_t from = 0;
        for (size_t pos = segment.find(token); pos != std::string::npos;
             pos = segment.find(token, from)) {
            out.append(segment, from, pos - from);
            out += "{" + fills[next++].result + "}";
            from = pos + token.size();
        }
        out.append(segment, from, segment.size() - from);
        back.segments.push_back(std::move(out));
    }
    return back;
}

BackfilledQuestion backfill(const ClozeQuestion& cloze, const std::vector<sql::SqlResult>& results) {
    std::vector<Fill> fills;
    fills.reserve(results.size());
    for (const sql::SqlResult& r : results) fills.push_back({"", sql::format_result(r)});
    return backfill(cloze, fills);
}

QuestionResult decompose_question(const std::string& question,
                                  const Table& table,
                                  llm::Provider& provider,
                                  const std::vector<ClozeExemplar>& cloze_exemplars,
                                  const std::vector<SqlExemplar>& sql_exemplars) {
    QuestionResult result;
    QuestionTrace& trace = result.trace;

    llm::CompletionResponse cloze_resp =
        provider.complete(stage_request(build_cloze_prompt(table, question, cloze_exemplars)));
    trace.raw_cloze = cloze_resp.samples.at(0);

    ClozeQuestion cloze;
    try {
        cloze = parse_cloze_response(trace.raw_cloze);
    } catch (const UnparseableCloze&) {
        cloze.segments = {question};
        trace.fallback = true;
    }
    trace.segments = cloze.segments;
    trace.placeholders = cloze.placeholder_count();

    if (trace.placeholders == 0) {
        result.backfilled.segments = cloze.segments;
        trace.backfilled = result.backfilled.segments;
        return result;
    }

    llm::CompletionResponse sql_resp =
        provider.complete(stage_request(build_sql_prompt(table, cloze, sql_exemplars)));
    trace.raw_sql = sql_resp.samples.at(0);

    std::vector<SqlCandidate> candidates;
    try {
        candidates = parse_sql_response(trace.raw_sql, table, trace.placeholders);
    } catch (const CountMismatch&) {
        // Unusable SQL stage: keep the original question untouched.
        trace.fallback = true;
        trace.segments = {question};
        trace.placeholders = 0;
        result.backfilled.segments = {question};
        trace.backfilled = result.backfilled.segments;
        return result;
    }

    std::vector<Fill> fills;
    for (const SqlCandidate& cand : candidates) {
        QueryStatus status;
        status.text = cand.text;
        Fill fill{cand.text, "unknown"};
        if (cand.parse_error) {
            status.status = "parse_error";
            status.error = *cand.parse_error;
        } else {
            try {
                sql::SqlQuery query = sql::parse_sql(cand.text, table.normalized_headers());
                fill.result = sql::format_result(sql::execute(query, table));
                status.status = "ok";
                status.result = fill.result;
            } catch (const sql::SqlError& e) {
                status.status = "exec_error";
                status.error = e.what();
            }
        }
        trace.queries.push_back(std::move(status));
        fills.push_back(std::move(fill));
    }

    result.backfilled = backfill(cloze, fills);
    trace.backfilled = result.backfilled.segments;
    return result;
}

} // namespace dater
