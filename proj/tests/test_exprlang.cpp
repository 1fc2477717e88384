#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "fmean/exprlang.hpp"

using namespace fmean;

TEST_CASE("basic parsing and evaluation") {
  CHECK(parse_scalar("x^2")(3.0) == doctest::Approx(9.0));
  CHECK(parse_scalar("sqrt(1+x^2)")(1.0) ==
        doctest::Approx(std::numbers::sqrt2));
  MultiFn h = parse_multi("exp(tan(y1))*sin(cos(y2))");
  CHECK(h.arity() == 2);
  double args[2] = {0.5, 0.25};
  CHECK(h(args) ==
        doctest::Approx(std::exp(std::tan(0.5)) * std::sin(std::cos(0.25))));
}

TEST_CASE("syntax errors carry byte offsets") {
  try {
    parse_scalar("sin(");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.offset == 4);
  }
  CHECK_THROWS_AS(parse_scalar("2x"), ParseError);
  CHECK_THROWS_AS(parse_scalar("foo(x)"), ParseError);
  CHECK_THROWS_AS(parse_scalar("y1"), ParseError);
  CHECK_THROWS_AS(parse_multi("y1+y3", 2), ParseError);
  CHECK_THROWS_AS(parse_scalar(""), ParseError);
}

TEST_CASE("domain errors at evaluation") {
  CHECK_THROWS_AS(parse_scalar("ln(x)")(-1.0), EvalDomainError);
  CHECK_THROWS_AS(parse_scalar("sqrt(x)")(-1.0), EvalDomainError);
}

TEST_CASE("precedence ladder") {
  CHECK(parse_scalar("2+3*4")(0.0) == doctest::Approx(14.0));
  CHECK(parse_scalar("2*3+4")(0.0) == doctest::Approx(10.0));
  CHECK(parse_scalar("2^3^2")(0.0) == doctest::Approx(512.0));  // right assoc
  CHECK(parse_scalar("-2^2")(0.0) == doctest::Approx(-4.0));
  CHECK(parse_scalar("2-3-4")(0.0) == doctest::Approx(-5.0));
  CHECK(parse_scalar("1+2*x")(3.0) == parse_scalar("1+(2*x)")(3.0));
}

TEST_CASE("symbolic derivatives on the catalog") {
  ScalarFn dsq = differentiate(parse_scalar("x^2"));
  CHECK(dsq(3.0) == doctest::Approx(6.0));
  ScalarFn dsin = differentiate(parse_scalar("sin(x)"));
  CHECK(dsin(0.7) == doctest::Approx(std::cos(0.7)));
  ScalarFn dexp = differentiate(parse_scalar("exp(x^2)"));
  double h = 1e-5;
  double fd = (std::exp((1.0 + h) * (1.0 + h)) -
               std::exp((1.0 - h) * (1.0 - h))) /
              (2.0 * h);
  CHECK(std::abs(dexp(1.0) - fd) <= 1e-6 * (1.0 + std::abs(fd)));
  CHECK(dexp(1.0) == doctest::Approx(2.0 * std::exp(1.0)));
}

namespace {

// random catalog expressions that stay finite and smooth on [-1, 1]
std::string gen_expr(std::mt19937_64& r, int depth) {
  auto pick = [&r](int m) { return static_cast<int>(r() % m); };
  if (depth <= 0) {
    if (pick(3) == 0) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "%.3f", 0.2 + 0.01 * pick(200));
      return buf;
    }
    return "x";
  }
  switch (pick(8)) {
    case 0: return "(" + gen_expr(r, depth - 1) + "+" + gen_expr(r, depth - 1) + ")";
    case 1: return "(" + gen_expr(r, depth - 1) + "-" + gen_expr(r, depth - 1) + ")";
    case 2: return "(" + gen_expr(r, depth - 1) + "*" + gen_expr(r, depth - 1) + ")";
    case 3: return "sin(" + gen_expr(r, depth - 1) + ")";
    case 4: return "cos(" + gen_expr(r, depth - 1) + ")";
    case 5: return "atan(" + gen_expr(r, depth - 1) + ")";
    case 6: return "exp(0.5*" + gen_expr(r, depth - 1) + ")";
    default: return gen_expr(r, depth - 1) + "^2";
  }
}

}  // namespace

TEST_CASE("derivatives match central differences on random expressions") {
  std::mt19937_64 r(2026);
  std::uniform_real_distribution<double> point(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    std::string src = gen_expr(r, 3);
    ScalarFn f = parse_scalar(src);
    ScalarFn df = differentiate(f);
    for (int j = 0; j < 10; ++j) {
      double x = point(r);
      double h = 1e-5;
      double fd = (f(x + h) - f(x - h)) / (2.0 * h);
      double sym = df(x);
      CHECK(std::abs(sym - fd) <= 1e-5 * (1.0 + std::abs(sym)));
    }
  }
}

TEST_CASE("parse-print-parse is idempotent") {
  std::mt19937_64 r(2027);
  std::uniform_real_distribution<double> point(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    std::string src = gen_expr(r, 3);
    ScalarFn f = parse_scalar(src);
    ScalarFn g = parse_scalar(f.str());
    CHECK(f.str() == g.str());
    for (int j = 0; j < 5; ++j) {
      double x = point(r);
      CHECK(f(x) == doctest::Approx(g(x)).epsilon(1e-12));
    }
  }
  ScalarFn d = differentiate(parse_scalar("sin(x^2)*exp(x)"));
  CHECK(d.str() == parse_scalar(d.str()).str());
}

TEST_CASE("node introspection helpers") {
  CHECK(parse_scalar("x").is_var());
  CHECK(parse_scalar("x^2").is_square_of_var());
  CHECK_FALSE(parse_scalar("x^3").is_square_of_var());
  CHECK(parse_scalar("2+3").constant_value() == 5.0);
  CHECK_FALSE(parse_scalar("x+1").constant_value().has_value());
}
