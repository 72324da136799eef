#include "dater/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "dater/text.hpp"

namespace dater {

using namespace text;

namespace {

using nlohmann::json;

std::string location(const std::string& path, size_t line) {
    return path + ":" + std::to_string(line);
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw StorageFailure("cannot open " + path + " for reading");
    return in;
}

json parse_line(const std::string& text, const std::string& path, size_t line_no) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(location(path, line_no) + ": " + e.what());
    }
}

// Pads short rows with empty cells; truncates long ones. Both warn.
std::vector<std::vector<std::string>> shape_rows(const std::vector<std::vector<std::string>>& raw,
                                                 size_t width, const std::string& where) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(raw.size());
    for (size_t r = 0; r < raw.size(); ++r) {
        if (raw[r].size() != width)
            std::cerr << "warning: " << where << " row " << (r + 1) << " has " << raw[r].size()
                      << " cells, expected " << width << " ("
                      << (raw[r].size() < width ? "padding" : "truncating") << ")\n";
        std::vector<std::string> row = raw[r];
        row.resize(width);
        rows.push_back(std::move(row));
    }
    return rows;
}

Table table_from_grid(const std::string& caption,
                      const std::vector<std::vector<std::string>>& grid,
                      const std::string& where) {
    if (grid.size() < 2)
        throw SchemaError(where + ": table needs a header row and at least one data row");
    std::vector<std::string> header = grid[0];
    if (header.empty()) throw SchemaError(where + ": table header row is empty");
    return Table(caption, header,
                 shape_rows({grid.begin() + 1, grid.end()}, header.size(), where));
}

std::vector<std::vector<std::string>> grid_from_json(const json& j, const std::string& where) {
    if (!j.is_array()) throw SchemaError(where + ": table is not an array");
    std::vector<std::vector<std::string>> grid;
    for (const json& row : j) {
        if (!row.is_array()) throw SchemaError(where + ": table row is not an array");
        std::vector<std::string> cells;
        for (const json& cell : row)
            cells.push_back(cell.is_string() ? cell.get<std::string>() : cell.dump());
        grid.push_back(std::move(cells));
    }
    return grid;
}

std::string require_string(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key) || !j.at(key).is_string())
        throw SchemaError(where + ": missing string field \"" + key + "\"");
    return j.at(key).get<std::string>();
}

// RFC-4180 style: quoted fields, doubled quotes, separators and newlines
// inside quotes.
std::vector<std::vector<std::string>> read_delimited(const std::string& path, char sep) {
    std::ifstream in = open_input(path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::string text = buffer.str();

    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool any = false;
    for (size_t i = 0; i < text.size(); ++i) {
        char ch = text[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += ch;
            }
        } else if (ch == '"' && field.empty()) {
            quoted = true;
            any = true;
        } else if (ch == sep) {
            row.push_back(std::exchange(field, {}));
            any = true;
        } else if (ch == '\n' || ch == '\r') {
            if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            if (any || !field.empty()) {
                row.push_back(std::exchange(field, {}));
                rows.push_back(std::exchange(row, {}));
            }
            any = false;
        } else {
            field += ch;
            any = true;
        }
    }
    if (any || !field.empty()) {
        row.push_back(field);
        rows.push_back(row);
    }
    return rows;
}

// Runs `parse` per non-empty line; with skip_invalid, failing lines warn and
// are dropped instead of aborting the load.
template <typename Fn>
std::vector<Example> load_jsonl(const std::string& path, bool skip_invalid, Fn parse) {
    std::ifstream in = open_input(path);
    std::vector<Example> examples;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::string where = location(path, line_no);
        try {
            examples.push_back(parse(parse_line(line, path, line_no), where));
        } catch (const Error& e) {
            if (!skip_invalid) throw;
            std::cerr << "warning: skipping " << where << ": " << e.what() << "\n";
        }
    }
    return examples;
}

std::vector<Example> load_canonical(const std::string& path, bool skip_invalid) {
    return load_jsonl(path, skip_invalid, [](const json& j, const std::string& where) {
        Example ex;
        ex.id = require_string(j, "id", where);
        ex.task = task_from_name(require_string(j, "task", where));
        ex.question = require_string(j, "question", where);
        if (!j.contains("gold") || !j.at("gold").is_array() || j.at("gold").empty())
            throw SchemaError(where + ": gold must be a non-empty array");
        for (const json& g : j.at("gold"))
            ex.gold.push_back(g.is_string() ? g.get<std::string>() : g.dump());
        if (!j.contains("table") || !j.at("table").is_object())
            throw SchemaError(where + ": missing table object");
        ex.table = table_from_json(j.at("table"), where);
        return ex;
    });
}

std::vector<Example> load_tabfact(const std::string& path, bool skip_invalid) {
    size_t line_no = 0; // fallback ids when records carry none
    return load_jsonl(path, skip_invalid, [&line_no](const json& j, const std::string& where) {
        ++line_no;
        Example ex;
        ex.id = j.contains("id") && j.at("id").is_string() ? j.at("id").get<std::string>()
                                                           : "tabfact-" + std::to_string(line_no);
        ex.task = Task::FactVerification;
        ex.question = require_string(j, "statement", where);
        if (!j.contains("label") || !j.at("label").is_number_integer())
            throw SchemaError(where + ": missing integer label");
        ex.gold = {j.at("label").get<int>() == 1 ? "yes" : "no"};
        if (!j.contains("table")) throw SchemaError(where + ": missing table");
        ex.table = table_from_grid(j.value("caption", std::string()),
                                   grid_from_json(j.at("table"), where), where);
        return ex;
    });
}

std::vector<Example> load_wtq(const std::string& path) {
    std::vector<std::vector<std::string>> rows = read_delimited(path, '\t');
    if (rows.empty()) throw SchemaError(path + ": empty TSV");
    const std::vector<std::string>& header = rows[0];
    auto column = [&](const std::string& name) -> size_t {
        for (size_t i = 0; i < header.size(); ++i)
            if (fold(header[i]) == name) return i;
        throw SchemaError(path + ": TSV header lacks column \"" + name + "\"");
    };
    size_t id_col = column("id"), utterance_col = column("utterance"),
           context_col = column("context"), target_col = column("targetvalue");
    std::filesystem::path base = std::filesystem::path(path).parent_path();

    std::vector<Example> examples;
    for (size_t r = 1; r < rows.size(); ++r) {
        const std::string where = location(path, r + 1);
        const std::vector<std::string>& row = rows[r];
        size_t needed = std::max({id_col, utterance_col, context_col, target_col});
        if (row.size() <= needed) throw SchemaError(where + ": too few TSV fields");
        Example ex;
        ex.id = row[id_col];
        ex.task = Task::QuestionAnswering;
        ex.question = row[utterance_col];
        for (const std::string& v : split(row[target_col], '|'))
            if (!trim(v).empty()) ex.gold.push_back(trim(v));
        if (ex.gold.empty()) ex.gold.push_back(row[target_col]);
        std::string table_path = (base / row[context_col]).string();
        std::vector<std::vector<std::string>> grid = read_delimited(table_path, ',');
        ex.table = table_from_grid("", grid, table_path);
        examples.push_back(std::move(ex));
    }
    return examples;
}

std::vector<Example> load_fetaqa(const std::string& path, bool skip_invalid) {
    size_t line_no = 0;
    return load_jsonl(path, skip_invalid, [&line_no](const json& j, const std::string& where) {
        ++line_no;
        Example ex;
        if (j.contains("feta_id"))
            ex.id = j.at("feta_id").is_string() ? j.at("feta_id").get<std::string>()
                                                : j.at("feta_id").dump();
        else
            ex.id = "fetaqa-" + std::to_string(line_no);
        ex.task = Task::FreeForm;
        ex.question = require_string(j, "question", where);
        ex.gold = {require_string(j, "answer", where)};
        if (!j.contains("table_array"))
            throw SchemaError(where + ": missing table_array");
        ex.table = table_from_grid(j.value("table_page_title", std::string()),
                                   grid_from_json(j.at("table_array"), where), where);
        return ex;
    });
}

json trace_json(const DecompositionTrace& t) {
    json queries = json::array();
    for (const QueryStatus& q : t.question_stage.queries)
        queries.push_back(json{{"text", q.text},
                               {"status", q.status},
                               {"error", q.error},
                               {"result", q.result}});
    return json{
        {"id", t.id},
        {"task", task_name(t.task)},
        {"question", t.question},
        {"gold", t.gold},
        {"cells_before", t.cells_before},
        {"cells_after", t.cells_after},
        {"evidence",
         json{{"raw", t.evidence.raw_response},
              {"rows", t.evidence.rows},
              {"cols", t.evidence.cols},
              {"dropped", t.evidence.dropped},
              {"fallback", t.evidence.fallback},
              {"skipped", t.evidence.skipped},
              {"truncated_rows", t.evidence.truncated_rows}}},
        {"question_stage",
         json{{"raw_cloze", t.question_stage.raw_cloze},
              {"segments", t.question_stage.segments},
              {"placeholders", t.question_stage.placeholders},
              {"raw_sql", t.question_stage.raw_sql},
              {"queries", queries},
              {"backfilled", t.question_stage.backfilled},
              {"fallback", t.question_stage.fallback},
              {"skipped", t.question_stage.skipped}}},
        {"answer_stage",
         json{{"samples", t.answer_stage.samples},
              {"votes", t.answer_stage.votes},
              {"final", t.answer_stage.final},
              {"fallback", t.answer_stage.fallback},
              {"tie_break", t.answer_stage.tie_break},
              {"discarded", t.answer_stage.discarded}}},
        {"timings_ms", t.timings_ms},
        {"error", t.error}};
}

DecompositionTrace trace_from(const json& j) {
    DecompositionTrace t;
    t.id = j.at("id").get<std::string>();
    t.task = task_from_name(j.at("task").get<std::string>());
    t.question = j.at("question").get<std::string>();
    t.gold = j.at("gold").get<std::vector<std::string>>();
    t.cells_before = j.at("cells_before").get<size_t>();
    t.cells_after = j.at("cells_after").get<size_t>();
    const json& e = j.at("evidence");
    t.evidence.raw_response = e.at("raw").get<std::string>();
    t.evidence.rows = e.at("rows").get<std::vector<int>>();
    t.evidence.cols = e.at("cols").get<std::vector<int>>();
    t.evidence.dropped = e.at("dropped").get<std::vector<std::string>>();
    t.evidence.fallback = e.at("fallback").get<bool>();
    t.evidence.skipped = e.at("skipped").get<bool>();
    t.evidence.truncated_rows = e.at("truncated_rows").get<size_t>();
    const json& q = j.at("question_stage");
    t.question_stage.raw_cloze = q.at("raw_cloze").get<std::string>();
    t.question_stage.segments = q.at("segments").get<std::vector<std::string>>();
    t.question_stage.placeholders = q.at("placeholders").get<size_t>();
    t.question_stage.raw_sql = q.at("raw_sql").get<std::string>();
    for (const json& qs : q.at("queries"))
        t.question_stage.queries.push_back(QueryStatus{qs.at("text").get<std::string>(),
                                                       qs.at("status").get<std::string>(),
                                                       qs.at("error").get<std::string>(),
                                                       qs.at("result").get<std::string>()});
    t.question_stage.backfilled = q.at("backfilled").get<std::vector<std::string>>();
    t.question_stage.fallback = q.at("fallback").get<bool>();
    t.question_stage.skipped = q.at("skipped").get<bool>();
    const json& a = j.at("answer_stage");
    t.answer_stage.samples = a.at("samples").get<std::vector<std::string>>();
    t.answer_stage.votes = a.at("votes").get<std::map<std::string, int>>();
    t.answer_stage.final = a.at("final").get<std::string>();
    t.answer_stage.fallback = a.at("fallback").get<bool>();
    t.answer_stage.tie_break = a.at("tie_break").get<bool>();
    t.answer_stage.discarded = a.at("discarded").get<int>();
    t.timings_ms = j.at("timings_ms").get<std::map<std::string, long long>>();
    t.error = j.at("error").get<std::string>();
    return t;
}

} // namespace

DatasetFormat dataset_format_from_name(const std::string& name) {
    std::string n = fold(name);
    if (n == "canonical") return DatasetFormat::Canonical;
    if (n == "tabfact") return DatasetFormat::TabFact;
    if (n == "wtq") return DatasetFormat::Wtq;
    if (n == "fetaqa") return DatasetFormat::FetaQa;
    throw SchemaError("unknown dataset format: " + name);
}

std::string dataset_format_name(DatasetFormat format) {
    switch (format) {
        case DatasetFormat::Canonical: return "canonical";
        case DatasetFormat::TabFact: return "tabfact";
        case DatasetFormat::Wtq: return "wtq";
        case DatasetFormat::FetaQa: return "fetaqa";
    }
    throw SchemaError("unknown dataset format");
}

AnswerTrace answer_trace_from(const AnswerRecord& record) {
    AnswerTrace t;
    t.samples = record.samples;
    t.votes = record.normalized_votes;
    t.final = record.final;
    t.fallback = record.fallback_used;
    t.tie_break = record.tie_break_applied;
    t.discarded = record.discarded;
    return t;
}

bool operator==(const EvidenceTrace& a, const EvidenceTrace& b) {
    return a.raw_response == b.raw_response && a.rows == b.rows && a.cols == b.cols &&
           a.dropped == b.dropped && a.fallback == b.fallback && a.skipped == b.skipped &&
           a.truncated_rows == b.truncated_rows;
}

bool operator==(const QueryStatus& a, const QueryStatus& b) {
    return a.text == b.text && a.status == b.status && a.error == b.error && a.result == b.result;
}

bool operator==(const QuestionTrace& a, const QuestionTrace& b) {
    return a.raw_cloze == b.raw_cloze && a.segments == b.segments &&
           a.placeholders == b.placeholders && a.raw_sql == b.raw_sql && a.queries == b.queries &&
           a.backfilled == b.backfilled && a.fallback == b.fallback && a.skipped == b.skipped;
}

bool operator==(const AnswerTrace& a, const AnswerTrace& b) {
    return a.samples == b.samples && a.votes == b.votes && a.final == b.final &&
           a.fallback == b.fallback && a.tie_break == b.tie_break && a.discarded == b.discarded;
}

std::vector<Example> load_dataset(const std::string& path, DatasetFormat format,
                                  bool skip_invalid) {
    std::vector<Example> examples;
    switch (format) {
        case DatasetFormat::Canonical: examples = load_canonical(path, skip_invalid); break;
        case DatasetFormat::TabFact: examples = load_tabfact(path, skip_invalid); break;
        case DatasetFormat::Wtq: examples = load_wtq(path); break;
        case DatasetFormat::FetaQa: examples = load_fetaqa(path, skip_invalid); break;
    }
    std::set<std::string> seen;
    for (const Example& ex : examples) {
        if (!seen.insert(ex.id).second)
            throw SchemaError(path + ": duplicate example id \"" + ex.id + "\"");
        if (ex.gold.empty()) throw SchemaError(path + ": example " + ex.id + " has empty gold");
    }
    return examples;
}

void write_canonical(const std::vector<Example>& examples, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw StorageFailure("cannot open " + path + " for writing");
    for (const Example& ex : examples) {
        json j{{"id", ex.id},
               {"task", task_name(ex.task)},
               {"table", table_to_json(ex.table)},
               {"question", ex.question},
               {"gold", ex.gold}};
        out << j.dump() << "\n";
    }
    if (!out.flush()) throw StorageFailure("failed writing " + path);
}

void write_traces(const std::vector<DecompositionTrace>& traces, const std::string& path) {
    std::vector<DecompositionTrace> ordered = traces;
    std::sort(ordered.begin(), ordered.end(),
              [](const DecompositionTrace& a, const DecompositionTrace& b) { return a.id < b.id; });
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw StorageFailure("cannot open " + path + " for writing");
    for (const DecompositionTrace& t : ordered) out << trace_to_json(t) << "\n";
    if (!out.flush()) throw StorageFailure("failed writing " + path);
}

std::vector<DecompositionTrace> read_traces(const std::string& path) {
    std::ifstream in = open_input(path);
    std::vector<DecompositionTrace> traces;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            traces.push_back(trace_from_json(line));
        } catch (const json::exception& e) {
            throw ParseError(location(path, line_no) + ": " + e.what());
        } catch (const ParseError& e) {
            throw ParseError(location(path, line_no) + ": " + e.what());
        }
    }
    return traces;
}

std::string trace_to_json(const DecompositionTrace& trace) {
    return trace_json(trace).dump();
}

DecompositionTrace trace_from_json(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw ParseError(e.what());
    }
    try {
        return trace_from(j);
    } catch (const json::exception& e) {
        throw ParseError(e.what());
    }
}

nlohmann::json table_to_json(const Table& table) {
    json rows = json::array();
    for (const auto& row : table.rows()) {
        json cells = json::array();
        for (const Cell& cell : row) cells.push_back(cell.raw);
        rows.push_back(std::move(cells));
    }
    return json{{"caption", table.caption()}, {"header", table.headers()}, {"rows", rows}};
}

Table table_from_json(const nlohmann::json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("header") || !j.contains("rows"))
        throw SchemaError(where + ": table needs header and rows");
    std::vector<std::vector<std::string>> grid;
    grid.push_back({});
    for (const json& h : j.at("header"))
        grid.back().push_back(h.is_string() ? h.get<std::string>() : h.dump());
    for (const auto& row : grid_from_json(j.at("rows"), where)) grid.push_back(row);
    return table_from_grid(j.value("caption", std::string()), grid, where);
}

} // namespace dater
