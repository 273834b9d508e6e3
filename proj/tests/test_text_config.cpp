#include <catch2/catch_amalgamated.hpp>

#include "astrolab/text_config.hpp"

using namespace astrolab;

TEST_CASE("sections, labels, comments, blank lines", "[config]") {
  const auto secs = parse_sections(
      "# leading comment\n"
      "\n"
      "[alpha]\n"
      "a = 1\n"
      "b = two words   # trailing comment\n"
      "\n"
      "[beta mylabel]\n"
      "a = 3\n");
  REQUIRE(secs.size() == 2);
  CHECK(secs[0].kind == "alpha");
  CHECK(secs[0].label.empty());
  CHECK(secs[0].line == 3);
  REQUIRE(secs[0].entries.size() == 2);
  CHECK(secs[0].entries[0].key == "a");
  CHECK(secs[0].entries[0].value == "1");
  CHECK(secs[0].entries[0].line == 4);
  CHECK(secs[0].entries[1].value == "two words");
  CHECK(secs[1].kind == "beta");
  CHECK(secs[1].label == "mylabel");
}

TEST_CASE("last entry wins lookups", "[config]") {
  const auto secs = parse_sections("[s]\nk = 1\nk = 2\n");
  REQUIRE(secs.size() == 1);
  CHECK(secs[0].count("k") == 2);
  CHECK(secs[0].find_last("k")->value == "2");
  CHECK(secs[0].find("k")->value == "1");
  CHECK(secs[0].find("missing") == nullptr);
}

TEST_CASE("syntax errors carry 1-based line numbers", "[config]") {
  const auto line_of = [](const std::string& text) {
    try {
      parse_sections(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return std::size_t{0};
  };
  CHECK(line_of("[s]\nnokey\n") == 2);          // missing =
  CHECK(line_of("k = 1\n") == 1);               // key before section
  CHECK(line_of("[s\n") == 1);                  // unterminated header
  CHECK(line_of("[]\n") == 1);                  // empty header
  CHECK(line_of("[s]\n = v\n") == 2);           // empty key
  CHECK(line_of("[ok]\nx = 1\n[s\n") == 3);
}

TEST_CASE("field splitting", "[config]") {
  CHECK(split_fields("1 2  3").size() == 3);
  CHECK(split_fields("").empty());
  CHECK(split_fields("  a  ").size() == 1);
}

TEST_CASE("scalar parsers reject junk and carry the line", "[config]") {
  CHECK(parse_double("2.5", 7) == 2.5);
  CHECK(parse_int("-3", 7) == -3);
  CHECK(parse_uint("42", 7) == 42);
  CHECK(parse_bool("true", 7));
  CHECK_FALSE(parse_bool("false", 7));
  const auto line_of = [](auto&& fn) {
    try {
      fn();
    } catch (const ParseError& e) {
      return e.line();
    }
    return std::size_t{0};
  };
  CHECK(line_of([] { parse_double("abc", 9); }) == 9);
  CHECK(line_of([] { parse_double("1.5x", 9); }) == 9);
  CHECK(line_of([] { parse_int("1.5", 9); }) == 9);
  CHECK(line_of([] { parse_uint("-1", 9); }) == 9);
  CHECK(line_of([] { parse_bool("maybe", 9); }) == 9);
}
