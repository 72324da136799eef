#include <doctest.h>

#include "dater/text.hpp"

using namespace dater::text;

TEST_CASE("lowercase and trim") {
    CHECK(to_lower("AbC-9 Ё") == "abc-9 Ё"); // non-ASCII bytes pass through
    CHECK(trim("  x y\t\n") == "x y");
    CHECK(trim("") == "");
    CHECK(trim(" \t ") == "");
}

TEST_CASE("whitespace collapsing and folding") {
    CHECK(collapse_spaces("a  b\t\tc\n\nd") == "a b c d");
    CHECK(fold("  City  or Town ") == "city or town");
    CHECK(fold("A\tB") == "a b");
}

TEST_CASE("case-insensitive comparison") {
    CHECK(ci_equal("SELECT", "select"));
    CHECK(!ci_equal("a", "ab"));
}

TEST_CASE("cell number parsing") {
    CHECK(parse_number("42") == 42.0);
    CHECK(parse_number(" -3.5 ") == -3.5);
    CHECK(parse_number("1,234") == 1234.0);
    CHECK(parse_number("1,234.5") == 1234.5);
    CHECK(parse_number("$1,000") == 1000.0);
    CHECK(parse_number("+7") == 7.0);
    CHECK(parse_number(".5") == 0.5);
    CHECK(!parse_number("").has_value());
    CHECK(!parse_number("abc").has_value());
    CHECK(!parse_number("12abc").has_value());
    CHECK(!parse_number("1e5").has_value());     // exponents stay text
    CHECK(!parse_number("12%").has_value());     // percents stay text
    CHECK(!parse_number("2001-02-03").has_value()); // dates stay text
    CHECK(!parse_number("1,23").has_value());    // bad grouping
}

TEST_CASE("number formatting round-trips") {
    CHECK(format_number(6) == "6");
    CHECK(format_number(3.5) == "3.5");
    CHECK(format_number(-0.0) == "0");
    CHECK(format_number(0.61) == "0.61");
    CHECK(format_number(1234567) == "1234567");
    CHECK(format_number(2.0 / 3.0) == "0.6666666666666666");
}

TEST_CASE("split and join") {
    CHECK(split("a|b||c", '|') == std::vector<std::string>{"a", "b", "", "c"});
    CHECK(split("", '|') == std::vector<std::string>{""});
    CHECK(join({"a", "b"}, ", ") == "a, b");
    CHECK(join({}, ",") == "");
}
