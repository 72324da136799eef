#include "dater/table.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "dater/text.hpp"

namespace dater {

namespace {

// '|' is the field separator and newlines are line separators, so both
// get rewritten inside fields.
std::string escape_field(std::string s) {
    std::replace(s.begin(), s.end(), '|', '/');
    std::replace(s.begin(), s.end(), '\n', ' ');
    std::replace(s.begin(), s.end(), '\r', ' ');
    return s;
}

} // namespace

Cell Cell::of(std::string raw_text) {
    Cell c;
    c.numeric = text::parse_number(raw_text);
    c.raw = std::move(raw_text);
    return c;
}

std::string normalize_header(const std::string& name) {
    return text::fold(name);
}

Table::Table(std::string caption,
             std::vector<std::string> headers,
             std::vector<std::vector<std::string>> rows)
    : caption_(std::move(caption)), headers_(std::move(headers)) {
    if (headers_.empty()) throw TableError("table needs at least one column");
    if (rows.empty()) throw TableError("table needs at least one row");

    normalized_headers_.reserve(headers_.size());
    std::unordered_set<std::string> seen;
    for (const auto& h : headers_) {
        std::string norm = normalize_header(h);
        if (seen.count(norm)) {
            int suffix = 2;
            while (seen.count(norm + "_" + std::to_string(suffix))) suffix++;
            norm += "_" + std::to_string(suffix);
        }
        seen.insert(norm);
        normalized_headers_.push_back(std::move(norm));
    }

    rows_.reserve(rows.size());
    for (auto& row : rows) {
        if (row.size() != headers_.size())
            throw TableError("ragged row: expected " + std::to_string(headers_.size()) +
                             " cells, got " + std::to_string(row.size()));
        std::vector<Cell> cells;
        cells.reserve(row.size());
        for (auto& value : row) cells.push_back(Cell::of(std::move(value)));
        rows_.push_back(std::move(cells));
    }
}

const Cell& Table::at(size_t row, size_t col) const {
    if (row >= rows_.size() || col >= headers_.size())
        throw OutOfBounds("cell (" + std::to_string(row) + ", " + std::to_string(col) +
                          ") outside " + std::to_string(rows_.size()) + "x" +
                          std::to_string(headers_.size()) + " table");
    return rows_[row][col];
}

std::optional<size_t> Table::column_index(const std::string& name) const {
    for (size_t i = 0; i < normalized_headers_.size(); ++i)
        if (normalized_headers_[i] == name) return i;
    return std::nullopt;
}

bool Table::operator==(const Table& other) const {
    return caption_ == other.caption_ && headers_ == other.headers_ &&
           rows_ == other.rows_;
}

IndexSelection IndexSelection::normalized(std::vector<int> rows, std::vector<int> cols) {
    auto tidy = [](std::vector<int>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    tidy(rows);
    tidy(cols);
    return IndexSelection{std::move(rows), std::move(cols)};
}

IndexSelection IndexSelection::full(const Table& table) {
    IndexSelection sel;
    for (size_t r = 1; r <= table.row_count(); ++r) sel.rows.push_back(static_cast<int>(r));
    for (size_t c = 1; c <= table.col_count(); ++c) sel.cols.push_back(static_cast<int>(c));
    return sel;
}

bool IndexSelection::is_full_for(const Table& table) const {
    return *this == full(table);
}

Table select_sub_table(const Table& table, const IndexSelection& sel) {
    if (sel.rows.empty() || sel.cols.empty())
        throw OutOfBounds("empty selection");
    for (int r : sel.rows)
        if (r < 1 || static_cast<size_t>(r) > table.row_count())
            throw OutOfBounds("row index " + std::to_string(r) + " outside table with " +
                              std::to_string(table.row_count()) + " rows");
    for (int c : sel.cols)
        if (c < 1 || static_cast<size_t>(c) > table.col_count())
            throw OutOfBounds("column index " + std::to_string(c) + " outside table with " +
                              std::to_string(table.col_count()) + " columns");

    std::vector<std::string> headers;
    for (int c : sel.cols) headers.push_back(table.headers()[c - 1]);

    std::vector<std::vector<std::string>> rows;
    for (int r : sel.rows) {
        std::vector<std::string> row;
        for (int c : sel.cols) row.push_back(table.at(r - 1, c - 1).raw);
        rows.push_back(std::move(row));
    }
    return Table(table.caption(), std::move(headers), std::move(rows));
}

std::string linearize(const Table& table) {
    std::string out = "caption : " + escape_field(table.caption());
    out += "\ncol :";
    for (size_t c = 0; c < table.col_count(); ++c) {
        out += c == 0 ? " " : " | ";
        out += escape_field(table.headers()[c]);
    }
    for (size_t r = 0; r < table.row_count(); ++r) {
        out += "\nrow " + std::to_string(r + 1) + " :";
        for (size_t c = 0; c < table.col_count(); ++c) {
            out += c == 0 ? " " : " | ";
            out += escape_field(table.at(r, c).raw);
        }
    }
    out += "\n";
    return out;
}

size_t cell_count(const Table& table) {
    return table.row_count() * table.col_count();
}

} // namespace dater
