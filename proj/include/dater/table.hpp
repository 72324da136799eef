#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dater/errors.hpp"

namespace dater {

class TableError : public Error {
public:
    using Error::Error;
};

class OutOfBounds : public Error {
public:
    using Error::Error;
};

// One table cell: the raw text plus its numeric reading, when the text
// parses as a number (commas as thousands separators and a leading
// currency sign are tolerated).
struct Cell {
    std::string raw;
    std::optional<double> numeric;

    static Cell of(std::string raw_text);

    bool operator==(const Cell& other) const { return raw == other.raw; }
};

// Immutable rectangular table with a caption and normalized headers.
// Headers are normalized to lowercase single-spaced trimmed form; name
// collisions after normalization get _2, _3, ... suffixes in column order
// so every normalized header is unique.
class Table {
public:
    Table(std::string caption,
          std::vector<std::string> headers,
          std::vector<std::vector<std::string>> rows);

    const std::string& caption() const { return caption_; }
    const std::vector<std::string>& headers() const { return headers_; }
    const std::vector<std::string>& normalized_headers() const { return normalized_headers_; }
    const std::vector<std::vector<Cell>>& rows() const { return rows_; }

    size_t row_count() const { return rows_.size(); }
    size_t col_count() const { return headers_.size(); }

    // 0-based access; prompts and traces stay 1-based.
    const Cell& at(size_t row, size_t col) const;

    // Index of the column whose normalized header equals `name` (already
    // normalized), or nullopt.
    std::optional<size_t> column_index(const std::string& name) const;

    bool operator==(const Table& other) const;

private:
    std::string caption_;
    std::vector<std::string> headers_;
    std::vector<std::string> normalized_headers_;
    std::vector<std::vector<Cell>> rows_;
};

// 1-based row and column selections, strictly increasing, non-empty.
struct IndexSelection {
    std::vector<int> rows;
    std::vector<int> cols;

    // Sorts and deduplicates both index lists.
    static IndexSelection normalized(std::vector<int> rows, std::vector<int> cols);
    static IndexSelection full(const Table& table);

    bool is_full_for(const Table& table) const;
    bool operator==(const IndexSelection& other) const = default;
};

std::string normalize_header(const std::string& name);

// Throws OutOfBounds when any index exceeds the table. Row and column
// order of the result follows the original table.
Table select_sub_table(const Table& table, const IndexSelection& sel);

// Prompt serialization (newline-terminated):
//   caption : <caption>
//   col : h1 | h2 | ...
//   row 1 : c1 | c2 | ...
// with every '|' inside a field replaced by '/'.
std::string linearize(const Table& table);

size_t cell_count(const Table& table);

} // namespace dater
