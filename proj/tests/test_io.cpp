#include "sib/io.hpp"

#include <doctest.h>

#include <cstdlib>
#include <string>

using namespace sib;

namespace {

const char* kBsc =
    "x_alphabet: [a, b]\n"
    "y_alphabet: [c, d]\n"
    "joint:\n"
    "  - [0.45, 0.05]\n"
    "  - [0.05, 0.45]\n";

int error_line(const std::string& text) {
  try {
    parse_source(text);
  } catch (const InputError& e) {
    return e.line();
  }
  return -1;
}

std::string error_text(const std::string& text) {
  try {
    parse_source(text);
  } catch (const InputError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("parse a source file") {
  const SourceFile s = parse_source(kBsc);
  CHECK(s.x_alphabet == std::vector<std::string>{"a", "b"});
  CHECK(s.y_alphabet == std::vector<std::string>{"c", "d"});
  CHECK(s.joint.probs()(0, 1) == 0.05);
  CHECK(s.joint.probs().sum() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("source file round trip") {
  const std::string text =
      "x_alphabet: [x0, x1, x2]\n"
      "y_alphabet: [y0, y1]\n"
      "joint:\n"
      "  - [0.1, 0.2]\n"
      "  - [0.3, 0.1]\n"
      "  - [0.25, 0.05]\n";
  const SourceFile a = parse_source(text);
  const SourceFile b = parse_source(format_source(a));
  CHECK(a.joint.probs() == b.joint.probs());
  CHECK(b.x_alphabet == a.x_alphabet);
}

TEST_CASE("source file errors carry line numbers") {
  CHECK(error_line("x_alphabet: [a, b]\ny_alphabet: [c, d]\njoint:\n  - [0.5, 0.0]\n  - [0.5, oops]\n") == 5);
  CHECK(error_line("x_alphabet: [a, b]\ny_alphabet: [c, d]\njoint:\n  - [0.5, 0.0]\n  - [0.5]\n") == 5);
  CHECK(error_line("x_alphabet: [a, b]\ny_alphabet: [c, d]\njoint:\n  - [0.5, -0.1]\n  - [0.5, 0.1]\n") == 4);
  CHECK(error_line("x_alphabet: [a, b]\njoint:\n  - [1, 0]\n") > 0);
  CHECK(error_line("x_alphabet: [a, b\n") > 0);
  CHECK(error_line("- 1\n- 2\n") == 1);
  const std::string sum = error_text("x_alphabet: [a]\ny_alphabet: [c, d]\njoint:\n  - [0.5, 0.6]\n");
  CHECK(sum.find("1.1") != std::string::npos);
  CHECK(sum.find("line 4") != std::string::npos);
}

TEST_CASE("sum tolerance") {
  CHECK_NOTHROW(parse_source("x_alphabet: [a]\ny_alphabet: [c, d]\njoint:\n  - [0.5, 0.5000000005]\n"));
  CHECK_THROWS_AS(parse_source("x_alphabet: [a]\ny_alphabet: [c, d]\njoint:\n  - [0.5, 0.500000002]\n"),
                  InputError);
}

TEST_CASE("beta grids") {
  const auto g = parse_beta_grid("# header\n1, 2\n\n3 4  # trailing\n5,6\n");
  REQUIRE(g.size() == 3);
  CHECK(g[1] == std::vector<double>{3.0, 4.0});
  CHECK(parse_beta_grid("").empty());
  try {
    parse_beta_grid("1,2\n3\n");
    FAIL("expected error");
  } catch (const InputError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_beta_grid("1,x\n"), InputError);
}

TEST_CASE("number lists") {
  CHECK(parse_number_list("0.1, 0.2,0.3") == std::vector<double>{0.1, 0.2, 0.3});
  const auto r = parse_number_list("0:1:5");
  REQUIRE(r.size() == 5);
  CHECK(r[1] == 0.25);
  CHECK(r.back() == 1.0);
  CHECK(parse_number_list("2:2:1") == std::vector<double>{2.0});
  CHECK_THROWS_AS(parse_number_list(""), InputError);
  CHECK_THROWS_AS(parse_number_list("1:0:3"), InputError);
  CHECK_THROWS_AS(parse_number_list("0:1:2.5"), InputError);
  CHECK_THROWS_AS(parse_number_list("0:1"), InputError);
}

TEST_CASE("nine significant digits round trip") {
  for (double v : {0.0, 1.0, 0.278071905112637652, 1e-7, 123456.789123, -0.5}) {
    const std::string s = format_number(v);
    CHECK(std::abs(std::strtod(s.c_str(), nullptr) - v) <= 5e-9 * std::max(1.0, std::abs(v)));
  }
  CHECK(format_number(0.278071905112637652) == "0.278071905");
}

TEST_CASE("missing files") { CHECK_THROWS_AS(read_text_file("/nonexistent/source.yaml"), InputError); }
