#include "dater/sql.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "dater/text.hpp"

namespace dater::sql {

namespace {

struct Token {
    enum class Kind { Word, String, Symbol, End };
    Kind kind = Kind::End;
    std::string value;
};

bool is_symbol_start(char c) {
    switch (c) {
        case '(':
        case ')':
        case ',':
        case '*':
        case ';':
        case '=':
        case '!':
        case '<':
        case '>':
            return true;
        default:
            return false;
    }
}

std::vector<Token> tokenize(const std::string& input) {
    std::vector<Token> tokens;
    size_t i = 0;
    while (i < input.size()) {
        char c = input[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            i++;
            continue;
        }
        if (c == '\'' || c == '"') {
            char quote = c;
            std::string value;
            size_t j = i + 1;
            bool closed = false;
            while (j < input.size()) {
                if (input[j] == quote) {
                    if (j + 1 < input.size() && input[j + 1] == quote) {
                        value.push_back(quote); // doubled quote escape
                        j += 2;
                        continue;
                    }
                    closed = true;
                    j++;
                    break;
                }
                value.push_back(input[j]);
                j++;
            }
            if (!closed) throw SyntaxError("unterminated string literal");
            tokens.push_back({Token::Kind::String, std::move(value)});
            i = j;
            continue;
        }
        if (is_symbol_start(c)) {
            std::string sym(1, c);
            if ((c == '<' || c == '>' || c == '!') && i + 1 < input.size() &&
                input[i + 1] == '=') {
                sym.push_back('=');
                i++;
            }
            tokens.push_back({Token::Kind::Symbol, std::move(sym)});
            i++;
            continue;
        }
        size_t j = i;
        while (j < input.size() && !std::isspace(static_cast<unsigned char>(input[j])) &&
               !is_symbol_start(input[j]) && input[j] != '\'' && input[j] != '"')
            j++;
        tokens.push_back({Token::Kind::Word, input.substr(i, j - i)});
        i = j;
    }
    tokens.push_back({Token::Kind::End, ""});
    return tokens;
}

class Parser {
public:
    Parser(std::vector<Token> tokens, const std::vector<std::string>& headers)
        : tokens_(std::move(tokens)), headers_(headers) {}

    SqlQuery parse() {
        expect_keyword("select");
        SqlQuery query = parse_select_clause();
        expect_keyword("from");
        if (!at_word() || text::fold(peek().value) != "w")
            throw SyntaxError("only table 'w' is supported");
        advance();

        if (at_keyword("where")) {
            advance();
            query.where = parse_or();
        }
        if (at_keyword("order")) {
            advance();
            expect_keyword("by");
            SqlQuery::OrderBy order;
            order.column = parse_column_ref();
            if (at_keyword("asc")) {
                advance();
            } else if (at_keyword("desc")) {
                order.ascending = false;
                advance();
            }
            query.order_by = order;
        }
        if (at_keyword("limit")) {
            advance();
            if (!at_word()) throw SyntaxError("LIMIT needs a positive integer");
            auto n = text::parse_number(peek().value);
            if (!n || *n < 1 || *n != std::floor(*n))
                throw SyntaxError("LIMIT needs a positive integer, got '" + peek().value + "'");
            query.limit = static_cast<long long>(*n);
            advance();
        }
        if (at_symbol(";")) advance();
        if (peek().kind != Token::Kind::End)
            throw SyntaxError("unexpected trailing input near '" + peek().value + "'");
        return query;
    }

private:
    const Token& peek(size_t ahead = 0) const {
        size_t i = std::min(pos_ + ahead, tokens_.size() - 1);
        return tokens_[i];
    }
    void advance() { pos_ = std::min(pos_ + 1, tokens_.size() - 1); }
    bool at_word() const { return peek().kind == Token::Kind::Word; }
    bool at_symbol(const std::string& s) const {
        return peek().kind == Token::Kind::Symbol && peek().value == s;
    }
    bool at_keyword(const std::string& kw) const {
        return at_word() && text::fold(peek().value) == kw;
    }
    void expect_keyword(const std::string& kw) {
        if (!at_keyword(kw))
            throw SyntaxError("expected " + text::to_lower(kw) + " near '" + peek().value + "'");
        advance();
    }
    void expect_symbol(const std::string& s) {
        if (!at_symbol(s)) throw SyntaxError("expected '" + s + "' near '" + peek().value + "'");
        advance();
    }

    static std::optional<AggregateFn> aggregate_by_name(const std::string& folded) {
        if (folded == "count") return AggregateFn::Count;
        if (folded == "sum") return AggregateFn::Sum;
        if (folded == "avg") return AggregateFn::Avg;
        if (folded == "min") return AggregateFn::Min;
        if (folded == "max") return AggregateFn::Max;
        return std::nullopt;
    }

    SqlQuery parse_select_clause() {
        SqlQuery query;
        if (at_symbol("*")) {
            advance();
            query.select = SqlQuery::SelectKind::Star;
            return query;
        }
        if (at_word()) {
            auto agg = aggregate_by_name(text::fold(peek().value));
            if (agg && peek(1).kind == Token::Kind::Symbol && peek(1).value == "(") {
                advance();
                advance(); // '('
                query.select = SqlQuery::SelectKind::Aggregate;
                query.aggregate = *agg;
                if (at_symbol("*")) {
                    if (*agg != AggregateFn::Count)
                        throw SyntaxError("only COUNT may aggregate *");
                    query.aggregate_star = true;
                    advance();
                } else {
                    query.aggregate_column = parse_column_ref();
                }
                expect_symbol(")");
                return query;
            }
        }
        query.select = SqlQuery::SelectKind::Columns;
        query.columns.push_back(parse_column_ref());
        while (at_symbol(",")) {
            advance();
            query.columns.push_back(parse_column_ref());
        }
        return query;
    }

    // Greedy longest match of a run of word tokens against the normalized
    // headers. Keywords like OR may sit inside a multi-word name ("city or
    // town"); the run only breaks at symbols, strings, and end of input.
    ColumnRef parse_column_ref() {
        if (!at_word())
            throw SyntaxError("expected a column name near '" + peek().value + "'");
        size_t max_run = 0;
        while (peek(max_run).kind == Token::Kind::Word) max_run++;

        for (size_t len = max_run; len >= 1; --len) {
            std::string joined;
            for (size_t k = 0; k < len; ++k) {
                if (k) joined += ' ';
                joined += peek(k).value;
            }
            std::string folded = text::fold(joined);
            size_t matches = static_cast<size_t>(
                std::count(headers_.begin(), headers_.end(), folded));
            if (matches > 1)
                throw AmbiguousColumn("column '" + folded + "' matches more than one header");
            if (matches == 1) {
                for (size_t k = 0; k < len; ++k) advance();
                return ColumnRef{folded};
            }
        }
        // A structural keyword where a column must start is malformed SQL
        // rather than a reference to a missing column (unless a header really
        // is named that way, which the greedy match above already handled).
        static const char* kReserved[] = {"select", "from", "where", "order", "by",
                                          "limit",  "asc",  "desc",  "and",   "or"};
        std::string first = text::fold(peek().value);
        for (const char* kw : kReserved)
            if (first == kw)
                throw SyntaxError("expected a column name, found keyword '" + peek().value + "'");
        throw UnknownColumn("no column matches '" + peek().value + "'");
    }

    Condition parse_or() {
        std::vector<Condition> parts;
        parts.push_back(parse_and());
        while (at_keyword("or")) {
            advance();
            parts.push_back(parse_and());
        }
        if (parts.size() == 1) return std::move(parts.front());
        Condition node;
        node.kind = Condition::Kind::Or;
        node.children = std::move(parts);
        return node;
    }

    Condition parse_and() {
        std::vector<Condition> parts;
        parts.push_back(parse_primary());
        while (at_keyword("and")) {
            advance();
            parts.push_back(parse_primary());
        }
        if (parts.size() == 1) return std::move(parts.front());
        Condition node;
        node.kind = Condition::Kind::And;
        node.children = std::move(parts);
        return node;
    }

    Condition parse_primary() {
        if (at_symbol("(")) {
            advance();
            Condition inner = parse_or();
            expect_symbol(")");
            return inner;
        }
        Condition node;
        node.kind = Condition::Kind::Leaf;
        node.leaf.column = parse_column_ref();
        node.leaf.op = parse_op();
        node.leaf.literal = parse_literal(node.leaf.op);
        return node;
    }

    CompareOp parse_op() {
        if (peek().kind == Token::Kind::Symbol) {
            const std::string& s = peek().value;
            CompareOp op;
            if (s == "=")
                op = CompareOp::Eq;
            else if (s == "!=")
                op = CompareOp::Ne;
            else if (s == "<")
                op = CompareOp::Lt;
            else if (s == "<=")
                op = CompareOp::Le;
            else if (s == ">")
                op = CompareOp::Gt;
            else if (s == ">=")
                op = CompareOp::Ge;
            else
                throw SyntaxError("expected a comparison operator, got '" + s + "'");
            advance();
            return op;
        }
        if (at_keyword("like")) {
            advance();
            return CompareOp::Like;
        }
        throw SyntaxError("expected a comparison operator near '" + peek().value + "'");
    }

    Literal parse_literal(CompareOp op) {
        if (peek().kind == Token::Kind::String) {
            Literal lit = Literal::of_text(peek().value);
            advance();
            return lit;
        }
        if (op == CompareOp::Like)
            throw SyntaxError("LIKE needs a quoted pattern");
        if (at_word()) {
            auto n = text::parse_number(peek().value);
            if (n) {
                advance();
                return Literal::of_number(*n);
            }
        }
        throw SyntaxError("expected a quoted string or number near '" + peek().value + "'");
    }

    std::vector<Token> tokens_;
    const std::vector<std::string>& headers_;
    size_t pos_ = 0;
};

const char* op_text(CompareOp op) {
    switch (op) {
        case CompareOp::Eq: return "=";
        case CompareOp::Ne: return "!=";
        case CompareOp::Lt: return "<";
        case CompareOp::Le: return "<=";
        case CompareOp::Gt: return ">";
        case CompareOp::Ge: return ">=";
        case CompareOp::Like: return "LIKE";
    }
    return "=";
}

const char* aggregate_text(AggregateFn fn) {
    switch (fn) {
        case AggregateFn::Count: return "COUNT";
        case AggregateFn::Sum: return "SUM";
        case AggregateFn::Avg: return "AVG";
        case AggregateFn::Min: return "MIN";
        case AggregateFn::Max: return "MAX";
    }
    return "COUNT";
}

std::string render_literal(const Literal& lit) {
    if (lit.is_number) return text::format_number(lit.number);
    std::string quoted = "'";
    for (char c : lit.token) {
        quoted.push_back(c);
        if (c == '\'') quoted.push_back('\'');
    }
    quoted.push_back('\'');
    return quoted;
}

std::string render_condition(const Condition& cond) {
    switch (cond.kind) {
        case Condition::Kind::Leaf:
            return cond.leaf.column.name + " " + op_text(cond.leaf.op) + " " +
                   render_literal(cond.leaf.literal);
        case Condition::Kind::And: {
            std::string out;
            for (size_t i = 0; i < cond.children.size(); ++i) {
                if (i) out += " AND ";
                const Condition& child = cond.children[i];
                if (child.kind == Condition::Kind::Or)
                    out += "(" + render_condition(child) + ")";
                else
                    out += render_condition(child);
            }
            return out;
        }
        case Condition::Kind::Or: {
            std::string out;
            for (size_t i = 0; i < cond.children.size(); ++i) {
                if (i) out += " OR ";
                out += render_condition(cond.children[i]);
            }
            return out;
        }
    }
    return "";
}

} // namespace

std::optional<double> Literal::numeric_reading() const {
    if (is_number) return number;
    return text::parse_number(token);
}

Literal Literal::of_number(double value) {
    Literal lit;
    lit.is_number = true;
    lit.number = value;
    lit.token = text::format_number(value);
    return lit;
}

Literal Literal::of_text(std::string value) {
    Literal lit;
    lit.is_number = false;
    lit.token = std::move(value);
    return lit;
}

SqlQuery parse_sql(const std::string& query_text, const std::vector<std::string>& headers) {
    Parser parser(tokenize(query_text), headers);
    return parser.parse();
}

std::string render_sql(const SqlQuery& query) {
    std::string out = "SELECT ";
    switch (query.select) {
        case SqlQuery::SelectKind::Star:
            out += "*";
            break;
        case SqlQuery::SelectKind::Aggregate:
            out += std::string(aggregate_text(query.aggregate)) + "(" +
                   (query.aggregate_star ? "*" : query.aggregate_column.name) + ")";
            break;
        case SqlQuery::SelectKind::Columns:
            for (size_t i = 0; i < query.columns.size(); ++i) {
                if (i) out += ", ";
                out += query.columns[i].name;
            }
            break;
    }
    out += " FROM w";
    if (query.where) out += " WHERE " + render_condition(*query.where);
    if (query.order_by)
        out += " ORDER BY " + query.order_by->column.name +
               (query.order_by->ascending ? " ASC" : " DESC");
    if (query.limit) out += " LIMIT " + std::to_string(*query.limit);
    return out;
}

} // namespace dater::sql
