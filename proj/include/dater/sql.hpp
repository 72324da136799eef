#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dater/errors.hpp"
#include "dater/table.hpp"

namespace dater::sql {

class SqlError : public Error {
public:
    using Error::Error;
};
class SyntaxError : public SqlError {
public:
    using SqlError::SqlError;
};
class UnknownColumn : public SqlError {
public:
    using SqlError::SqlError;
};
class AmbiguousColumn : public SqlError {
public:
    using SqlError::SqlError;
};
class TypeMismatch : public SqlError {
public:
    using SqlError::SqlError;
};
class EmptyAggregate : public SqlError {
public:
    using SqlError::SqlError;
};

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge, Like };
enum class AggregateFn { Count, Sum, Avg, Min, Max };

// Column references hold the normalized header name; they are re-resolved
// against the execution table, so a query parsed once can run on any table
// that still carries the column.
struct ColumnRef {
    std::string name;
    bool operator==(const ColumnRef&) const = default;
};

struct Literal {
    bool is_number = false;
    double number = 0;
    std::string token;                  // source text for strings, canonical for numbers
    std::optional<double> numeric_reading() const;

    static Literal of_number(double value);
    static Literal of_text(std::string value);
    bool operator==(const Literal&) const = default;
};

struct Comparison {
    ColumnRef column;
    CompareOp op = CompareOp::Eq;
    Literal literal;
    bool operator==(const Comparison&) const = default;
};

// Condition tree. AND binds tighter than OR, so the parser produces an
// Or node of And nodes; parenthesized groups nest.
struct Condition {
    enum class Kind { Leaf, And, Or };
    Kind kind = Kind::Leaf;
    Comparison leaf;                    // Kind::Leaf
    std::vector<Condition> children;    // Kind::And / Kind::Or
    bool operator==(const Condition&) const = default;
};

struct SqlQuery {
    enum class SelectKind { Star, Columns, Aggregate };
    struct OrderBy {
        ColumnRef column;
        bool ascending = true;
        bool operator==(const OrderBy&) const = default;
    };

    SelectKind select = SelectKind::Star;
    std::vector<ColumnRef> columns;     // SelectKind::Columns
    AggregateFn aggregate = AggregateFn::Count;
    bool aggregate_star = false;        // COUNT(*)
    ColumnRef aggregate_column;         // when !aggregate_star
    std::optional<Condition> where;
    std::optional<OrderBy> order_by;
    std::optional<long long> limit;
    bool operator==(const SqlQuery&) const = default;
};

struct Value {
    enum class Kind { Null, Number, Text };
    Kind kind = Kind::Null;
    double number = 0;
    std::string text;

    static Value null();
    static Value of(double v);
    static Value of(std::string v);
    bool operator==(const Value&) const = default;
};

struct SqlResult {
    enum class Kind { Scalar, List };
    Kind kind = Kind::Scalar;
    Value scalar;
    std::vector<Value> items;

    static SqlResult scalar_of(Value v);
    static SqlResult list_of(std::vector<Value> v);
    bool operator==(const SqlResult&) const = default;
};

// Grammar:
//   SELECT (* | agg(col|*) | col[, col]*) FROM w
//     [WHERE cond] [ORDER BY col [ASC|DESC]] [LIMIT n]
//   cond := cond AND cond | cond OR cond | ( cond ) | col op literal
// Keywords are case-insensitive; multi-word column names resolve by greedy
// longest match of token runs against the normalized headers.
SqlQuery parse_sql(const std::string& query_text, const std::vector<std::string>& headers);

// Canonical SQL text; parse -> render -> parse is a fixed point.
std::string render_sql(const SqlQuery& query);

SqlResult execute(const SqlQuery& query, const Table& table);

// Integers without a decimal point, other numbers with minimal digits,
// lists joined by ", ", null as "none".
std::string format_result(const SqlResult& result);

} // namespace dater::sql
