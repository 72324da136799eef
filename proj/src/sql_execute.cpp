#include <algorithm>
#include <numeric>

#include "dater/sql.hpp"
#include "dater/text.hpp"

namespace dater::sql {

namespace {

size_t resolve_column(const Table& table, const ColumnRef& ref) {
    auto idx = table.column_index(ref.name);
    if (!idx) throw UnknownColumn("table has no column '" + ref.name + "'");
    return *idx;
}

// '%' matches any run of characters, matching is case-insensitive, '_' is
// an ordinary character.
bool like_match(const std::string& value, const std::string& pattern) {
    std::string s = text::to_lower(value);
    std::string p = text::to_lower(pattern);
    auto segments = text::split(p, '%');
    if (segments.size() == 1) return s == p;

    size_t pos = 0;
    if (!segments.front().empty()) {
        if (s.rfind(segments.front(), 0) != 0) return false;
        pos = segments.front().size();
    }
    for (size_t i = 1; i + 1 < segments.size(); ++i) {
        if (segments[i].empty()) continue;
        size_t found = s.find(segments[i], pos);
        if (found == std::string::npos) return false;
        pos = found + segments[i].size();
    }
    const std::string& tail = segments.back();
    if (tail.empty()) return true;
    if (s.size() < pos + tail.size()) return false;
    return s.compare(s.size() - tail.size(), tail.size(), tail) == 0;
}

bool compare_cell(const Cell& cell, const Comparison& cmp) {
    auto literal_number = cmp.literal.numeric_reading();
    switch (cmp.op) {
        case CompareOp::Eq:
        case CompareOp::Ne: {
            bool equal;
            if (cell.numeric && literal_number)
                equal = *cell.numeric == *literal_number;
            else
                equal = text::fold(cell.raw) == text::fold(cmp.literal.token);
            return cmp.op == CompareOp::Eq ? equal : !equal;
        }
        case CompareOp::Lt:
        case CompareOp::Le:
        case CompareOp::Gt:
        case CompareOp::Ge: {
            if (!cell.numeric || !literal_number)
                throw TypeMismatch("ordered comparison on '" + cmp.column.name +
                                   "' needs numbers on both sides (cell '" + cell.raw +
                                   "', literal '" + cmp.literal.token + "')");
            double a = *cell.numeric, b = *literal_number;
            switch (cmp.op) {
                case CompareOp::Lt: return a < b;
                case CompareOp::Le: return a <= b;
                case CompareOp::Gt: return a > b;
                default: return a >= b;
            }
        }
        case CompareOp::Like:
            return like_match(cell.raw, cmp.literal.token);
    }
    return false;
}

// Left-to-right with short-circuit, so a condition that never gets
// evaluated cannot raise TypeMismatch.
bool eval_condition(const Condition& cond, const Table& table, size_t row) {
    switch (cond.kind) {
        case Condition::Kind::Leaf: {
            size_t col = resolve_column(table, cond.leaf.column);
            return compare_cell(table.at(row, col), cond.leaf);
        }
        case Condition::Kind::And:
            for (const auto& child : cond.children)
                if (!eval_condition(child, table, row)) return false;
            return true;
        case Condition::Kind::Or:
            for (const auto& child : cond.children)
                if (eval_condition(child, table, row)) return true;
            return false;
    }
    return false;
}

// Numeric cells order before text cells; numbers by value, text by folded
// form. Ties keep the original row order via stable_sort.
bool cell_less(const Cell& a, const Cell& b) {
    if (a.numeric && b.numeric) return *a.numeric < *b.numeric;
    if (a.numeric) return true;
    if (b.numeric) return false;
    return text::fold(a.raw) < text::fold(b.raw);
}

Value aggregate_rows(const SqlQuery& query, const Table& table,
                     const std::vector<size_t>& rows) {
    if (query.aggregate == AggregateFn::Count)
        return Value::of(static_cast<double>(rows.size()));

    size_t col = resolve_column(table, query.aggregate_column);
    std::vector<double> numbers;
    numbers.reserve(rows.size());
    bool saw_non_numeric = false;
    for (size_t r : rows) {
        const Cell& cell = table.at(r, col);
        if (cell.numeric)
            numbers.push_back(*cell.numeric);
        else
            saw_non_numeric = true;
    }

    switch (query.aggregate) {
        case AggregateFn::Sum:
        case AggregateFn::Avg: {
            // Non-numeric cells are skipped; an aggregate over none at all
            // is an error rather than a silent zero.
            if (numbers.empty())
                throw EmptyAggregate(std::string(query.aggregate == AggregateFn::Sum
                                                     ? "SUM"
                                                     : "AVG") +
                                     "(" + query.aggregate_column.name +
                                     ") has no numeric cells to aggregate");
            double sum = std::accumulate(numbers.begin(), numbers.end(), 0.0);
            if (query.aggregate == AggregateFn::Sum) return Value::of(sum);
            return Value::of(sum / static_cast<double>(numbers.size()));
        }
        case AggregateFn::Min:
        case AggregateFn::Max: {
            if (saw_non_numeric)
                throw TypeMismatch(std::string(query.aggregate == AggregateFn::Min
                                                   ? "MIN"
                                                   : "MAX") +
                                   "(" + query.aggregate_column.name +
                                   ") over cells without a numeric reading");
            if (numbers.empty())
                throw EmptyAggregate(std::string(query.aggregate == AggregateFn::Min
                                                     ? "MIN"
                                                     : "MAX") +
                                     "(" + query.aggregate_column.name +
                                     ") over zero rows");
            auto [lo, hi] = std::minmax_element(numbers.begin(), numbers.end());
            return Value::of(query.aggregate == AggregateFn::Min ? *lo : *hi);
        }
        default:
            return Value::of(0.0);
    }
}

} // namespace

Value Value::null() {
    return Value{};
}

Value Value::of(double v) {
    Value value;
    value.kind = Kind::Number;
    value.number = v;
    return value;
}

Value Value::of(std::string v) {
    Value value;
    value.kind = Kind::Text;
    value.text = std::move(v);
    return value;
}

SqlResult SqlResult::scalar_of(Value v) {
    SqlResult r;
    r.kind = Kind::Scalar;
    r.scalar = std::move(v);
    return r;
}

SqlResult SqlResult::list_of(std::vector<Value> v) {
    SqlResult r;
    r.kind = Kind::List;
    r.items = std::move(v);
    return r;
}

SqlResult execute(const SqlQuery& query, const Table& table) {
    // Resolve every referenced column up front so unknown columns surface
    // even when the WHERE clause short-circuits past them.
    if (query.select == SqlQuery::SelectKind::Columns)
        for (const auto& c : query.columns) resolve_column(table, c);
    if (query.select == SqlQuery::SelectKind::Aggregate && !query.aggregate_star)
        resolve_column(table, query.aggregate_column);
    if (query.order_by) resolve_column(table, query.order_by->column);
    {
        std::vector<const Condition*> stack;
        if (query.where) stack.push_back(&*query.where);
        while (!stack.empty()) {
            const Condition* cond = stack.back();
            stack.pop_back();
            if (cond->kind == Condition::Kind::Leaf)
                resolve_column(table, cond->leaf.column);
            else
                for (const auto& child : cond->children) stack.push_back(&child);
        }
    }

    std::vector<size_t> rows;
    for (size_t r = 0; r < table.row_count(); ++r)
        if (!query.where || eval_condition(*query.where, table, r)) rows.push_back(r);

    if (query.select == SqlQuery::SelectKind::Aggregate)
        return SqlResult::scalar_of(aggregate_rows(query, table, rows));

    if (query.order_by) {
        size_t col = resolve_column(table, query.order_by->column);
        bool asc = query.order_by->ascending;
        std::stable_sort(rows.begin(), rows.end(), [&](size_t a, size_t b) {
            const Cell& ca = table.at(a, col);
            const Cell& cb = table.at(b, col);
            return asc ? cell_less(ca, cb) : cell_less(cb, ca);
        });
    }
    if (query.limit && rows.size() > static_cast<size_t>(*query.limit))
        rows.resize(static_cast<size_t>(*query.limit));

    std::vector<size_t> cols;
    if (query.select == SqlQuery::SelectKind::Star) {
        cols.resize(table.col_count());
        std::iota(cols.begin(), cols.end(), 0);
    } else {
        for (const auto& c : query.columns) cols.push_back(resolve_column(table, c));
    }

    // Multi-column selections flatten row-major.
    std::vector<Value> items;
    items.reserve(rows.size() * cols.size());
    for (size_t r : rows)
        for (size_t c : cols) items.push_back(Value::of(table.at(r, c).raw));
    return SqlResult::list_of(std::move(items));
}

std::string format_result(const SqlResult& result) {
    auto render = [](const Value& v) -> std::string {
        switch (v.kind) {
            case Value::Kind::Null: return "none";
            case Value::Kind::Number: return text::format_number(v.number);
            case Value::Kind::Text: return v.text;
        }
        return "none";
    };
    if (result.kind == SqlResult::Kind::Scalar) return render(result.scalar);
    std::vector<std::string> parts;
    parts.reserve(result.items.size());
    for (const auto& v : result.items) parts.push_back(render(v));
    return text::join(parts, ", ");
}

} // namespace dater::sql
