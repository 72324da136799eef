#include "dater/evidence.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>
#include <sstream>

#include "dater/text.hpp"

namespace dater {

using namespace text;

namespace {

// First `count` rows of `table` as raw strings, for rebuilding a truncated
// prompt table.
std::vector<std::vector<std::string>> row_prefix(const Table& table, size_t count) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(count);
    for (size_t r = 0; r < count; ++r) {
        std::vector<std::string> row;
        row.reserve(table.col_count());
        for (const Cell& cell : table.rows()[r]) row.push_back(cell.raw);
        rows.push_back(std::move(row));
    }
    return rows;
}

constexpr const char* kInstruction =
    "Select the rows and columns of the table that are needed to answer the "
    "question.\n"
    "Reply with two lines: ROWS: [row numbers, or *] and COLS: [column names, "
    "or *].\n";

std::string render_selection(const Table& table, const IndexSelection& selection) {
    IndexSelection s = IndexSelection::normalized(selection.rows, selection.cols);
    std::ostringstream out;
    out << "ROWS: [";
    for (size_t i = 0; i < s.rows.size(); ++i) {
        if (s.rows[i] < 1 || static_cast<size_t>(s.rows[i]) > table.row_count())
            throw OutOfBounds("exemplar row index " + std::to_string(s.rows[i]) +
                              " outside table with " + std::to_string(table.row_count()) + " rows");
        out << (i ? ", " : "") << s.rows[i];
    }
    out << "]\nCOLS: [";
    for (size_t i = 0; i < s.cols.size(); ++i) {
        if (s.cols[i] < 1 || static_cast<size_t>(s.cols[i]) > table.col_count())
            throw OutOfBounds("exemplar column index " + std::to_string(s.cols[i]) +
                              " outside table with " + std::to_string(table.col_count()) + " columns");
        out << (i ? ", " : "") << table.normalized_headers()[static_cast<size_t>(s.cols[i]) - 1];
    }
    out << "]";
    return out.str();
}

// Case-insensitive "<tag>:" prefix on a trimmed line; returns the remainder.
bool match_tag_line(const std::string& line, const std::string& tag, std::string* rest) {
    std::string t = trim(line);
    if (t.size() < tag.size() + 1) return false;
    for (size_t i = 0; i < tag.size(); ++i)
        if (to_lower(std::string(1, t[i])) != std::string(1, tag[i])) return false;
    size_t pos = tag.size();
    while (pos < t.size() && t[pos] == ' ') ++pos;
    if (pos >= t.size() || t[pos] != ':') return false;
    *rest = trim(t.substr(pos + 1));
    return true;
}

// Entries between optional brackets, comma-separated.
std::vector<std::string> list_entries(const std::string& rest) {
    std::string inner = rest;
    size_t open = inner.find('[');
    if (open != std::string::npos) {
        size_t close = inner.rfind(']');
        inner = close != std::string::npos && close > open
                    ? inner.substr(open + 1, close - open - 1)
                    : inner.substr(open + 1);
    }
    std::vector<std::string> entries;
    for (const std::string& e : split(inner, ','))
        if (!trim(e).empty()) entries.push_back(trim(e));
    return entries;
}

bool parse_int_entry(const std::string& entry, long* value) {
    const char* begin = entry.c_str();
    char* end = nullptr;
    long v = std::strtol(begin, &end, 10);
    if (end == begin || *end != '\0') return false;
    *value = v;
    return true;
}

} // namespace

std::string build_evidence_prompt(const Table& table,
                                  const std::string& question,
                                  const std::vector<EvidenceExemplar>& exemplars) {
    if (exemplars.empty())
        throw Error("evidence prompt requires at least one exemplar");
    std::ostringstream out;
    out << kInstruction;
    for (const EvidenceExemplar& ex : exemplars) {
        out << "\n" << linearize(ex.table)
            << "question : " << ex.question << "\n"
            << "answer:\n"
            << render_selection(ex.table, ex.selection) << "\n";
    }
    out << "\n" << linearize(table)
        << "question : " << question << "\n"
        << "answer:\n";
    return out.str();
}

IndexParse parse_index_response(const std::string& response, const Table& table) {
    std::string rows_rest, cols_rest;
    bool have_rows = false, have_cols = false;
    for (const std::string& line : split(response, '\n')) {
        std::string rest;
        if (!have_rows && match_tag_line(line, "rows", &rest)) {
            rows_rest = rest;
            have_rows = true;
        } else if (!have_cols && match_tag_line(line, "cols", &rest)) {
            cols_rest = rest;
            have_cols = true;
        }
        if (have_rows && have_cols) break;
    }
    if (!have_rows || !have_cols)
        throw UnparseableSelection("response has no ROWS:/COLS: lines: " +
                                   response.substr(0, std::min<size_t>(response.size(), 120)));

    IndexParse parsed;
    std::set<int> rows, cols;
    bool all_rows = false, all_cols = false;
    for (const std::string& entry : list_entries(rows_rest)) {
        if (entry == "*") {
            all_rows = true;
            continue;
        }
        long v = 0;
        if (parse_int_entry(entry, &v) && v >= 1 && static_cast<size_t>(v) <= table.row_count())
            rows.insert(static_cast<int>(v));
        else
            parsed.dropped.push_back("row " + entry);
    }
    for (const std::string& entry : list_entries(cols_rest)) {
        if (entry == "*") {
            all_cols = true;
            continue;
        }
        std::optional<size_t> idx = table.column_index(normalize_header(entry));
        if (idx)
            cols.insert(static_cast<int>(*idx) + 1);
        else
            parsed.dropped.push_back("col " + entry);
    }
    if (all_rows)
        for (size_t r = 1; r <= table.row_count(); ++r) rows.insert(static_cast<int>(r));
    if (all_cols)
        for (size_t c = 1; c <= table.col_count(); ++c) cols.insert(static_cast<int>(c));
    if (rows.empty() || cols.empty())
        throw EmptySelection(std::string(rows.empty() ? "row" : "column") +
                             " list has no usable entries: " +
                             response.substr(0, std::min<size_t>(response.size(), 120)));
    parsed.selection.rows.assign(rows.begin(), rows.end());
    parsed.selection.cols.assign(cols.begin(), cols.end());
    return parsed;
}

EvidenceResult decompose_evidence(const Table& table,
                                  const std::string& question,
                                  llm::Provider& provider,
                                  const std::vector<EvidenceExemplar>& exemplars,
                                  size_t context_budget_chars) {
    Table shown = table;
    size_t truncated_rows = 0;
    std::string prompt = build_evidence_prompt(shown, question, exemplars);
    if (context_budget_chars > 0 && prompt.size() > context_budget_chars) {
        // Keep the longest row prefix that fits the budget.
        size_t lo = 1, hi = table.row_count(), best = 0;
        while (lo <= hi) {
            size_t mid = lo + (hi - lo) / 2;
            Table probe(table.caption(), table.headers(), row_prefix(table, mid));
            if (build_evidence_prompt(probe, question, exemplars).size() <= context_budget_chars) {
                best = mid;
                lo = mid + 1;
            } else {
                if (mid == 0) break;
                hi = mid - 1;
            }
        }
        if (best == 0)
            throw llm::ContextOverflow("evidence prompt exceeds context budget (" +
                                       std::to_string(prompt.size()) + " > " +
                                       std::to_string(context_budget_chars) +
                                       " chars) even with a single table row");
        shown = Table(table.caption(), table.headers(), row_prefix(table, best));
        truncated_rows = best;
        prompt = build_evidence_prompt(shown, question, exemplars);
    }

    llm::CompletionRequest req;
    req.prompt = prompt;
    req.temperature = 0.0;
    req.n = 1;
    req.max_tokens = 512;
    req.stop = {"\n\n"};
    llm::CompletionResponse resp = provider.complete(req);

    EvidenceResult result{table, IndexSelection::full(table), {}};
    result.trace.raw_response = resp.samples.at(0);
    result.trace.truncated_rows = truncated_rows;
    try {
        IndexParse parsed = parse_index_response(resp.samples.at(0), table);
        result.selection = parsed.selection;
        result.sub_table = select_sub_table(table, parsed.selection);
        result.trace.dropped = parsed.dropped;
    } catch (const UnparseableSelection&) {
        result.trace.fallback = true;
    } catch (const EmptySelection&) {
        result.trace.fallback = true;
    }
    result.trace.rows = result.selection.rows;
    result.trace.cols = result.selection.cols;
    return result;
}

} // namespace dater
