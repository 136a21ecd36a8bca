#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mfg/expr.hpp"

using mfg::Expression;

TEST_CASE("expression evaluation") {
  const double pi = std::numbers::pi;
  CHECK(Expression::parse("4*x")(0.25) == 1.0);
  CHECK(Expression::parse("4*x + 1")(0.5) == 3.0);
  CHECK(Expression::parse("2^3^2")(0) == 512.0);
  CHECK(Expression::parse("-2^2")(0) == -4.0);
  CHECK(Expression::parse("(1+2)*3 - 4/2")(0) == 7.0);
  CHECK(Expression::parse("max(0, 9*x*sin(5*pi*x))")(0.1) ==
        doctest::Approx(std::max(0.0, 0.9 * std::sin(0.5 * pi))));
  CHECK(Expression::parse("15*(cos(2*pi*x) + 1)")(0.5) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(Expression::parse("x*y + min(x, y)")(0.5, 0.25) == 0.375);
  CHECK(Expression::parse("sqrt(abs(-4)) + exp(0)")(0) == 3.0);
  CHECK(Expression::parse(" 1e-1 * .5 ")(0) == doctest::Approx(0.05));
  CHECK(Expression::parse("x").text() == "x");
}

TEST_CASE("expression errors") {
  for (const char* bad : {"", "4*", "(x", "foo(x)", "max(1)", "sin(1, 2)", "x x", "3 $"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(Expression::parse(bad), std::invalid_argument);
  }
  try {
    Expression::parse("1 + z");
    FAIL("no throw");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("column 5") != std::string::npos);
  }
}
