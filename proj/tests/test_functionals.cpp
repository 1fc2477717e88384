#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fmean/functionals.hpp"
#include "fmean/montecarlo.hpp"

using namespace fmean;

namespace {

PathSample constant_path(int n, double c) {
  PathSample p;
  p.values = Eigen::VectorXd::Constant(n, c);
  p.x0 = c;
  return p;
}

PathSample ramp_path(int n) {  // x(t) = t on the grid
  PathSample p;
  p.values.resize(n);
  for (int k = 1; k <= n; ++k) p.values[k - 1] = static_cast<double>(k) / n;
  p.x0 = 0.0;
  return p;
}

}  // namespace

TEST_CASE("atom text forms round trip") {
  for (const char* src :
       {"int(x;0,1)", "lin(1+x;0,0.5)", "dint(sqrt(1+x^2);0,1)", "pt(0.25)",
        "mint(y1*y2;0,0.5;0.5,1)", "dq(x^2)"}) {
    Atom atom = parse_atom(src);
    CHECK(atom_str(parse_atom(atom_str(atom))) == atom_str(atom));
  }
  CHECK_THROWS_AS(parse_atom("frob(x;0,1)"), ParseError);
  CHECK_THROWS_AS(parse_atom("int(x;0.7,0.2)"), ParameterError);
}

TEST_CASE("integral atoms on paths and layers") {
  Grid grid(8);
  Sample path{constant_path(8, 0.37)};
  CHECK(eval_atom(parse_atom("int(x;0,1)"), path, grid) ==
        doctest::Approx(0.37));
  LayerSample layer;
  layer.weights = Eigen::VectorXd::Constant(8, 1.0 / 8.0);
  double expected = 0.0;
  for (int k = 1; k <= 8; ++k) expected += (k / 8.0) * (1.0 / 8.0);
  CHECK(eval_atom(parse_atom("int(x;0,1)"), Sample{layer}, grid) ==
        doctest::Approx(expected));
  // z carries no positional data: partial intervals are rejected
  CHECK_THROWS_AS(eval_atom(parse_atom("int(x;0,0.5)"), Sample{layer}, grid),
                  UnsupportedQuery);
}

TEST_CASE("derivative atoms need derivative samples") {
  Grid grid(8);
  DerivSample d;
  d.deriv = Eigen::VectorXd::Constant(8, 1.0);
  d.path.resize(8);
  for (int k = 1; k <= 8; ++k) d.path[k - 1] = k / 8.0;
  CHECK(eval_atom(parse_atom("dint(sqrt(1+x^2);0,1)"), Sample{d}, grid) ==
        doctest::Approx(std::numbers::sqrt2));
  CHECK_THROWS_AS(
      eval_atom(parse_atom("dint(x;0,1)"), Sample{constant_path(8, 1.0)}, grid),
      UnsupportedQuery);
}

TEST_CASE("difference quotients recover slopes") {
  Grid grid(8);
  Sample ramp{ramp_path(8)};
  // x_k - x_{k-1} = 1/n, so g(n dx) = g(1)
  CHECK(eval_atom(parse_atom("dq(x^2)"), ramp, grid) == doctest::Approx(1.0));
}

TEST_CASE("point atoms snap to the nearest node") {
  CHECK(snap_node(0.5, 4, false) == 2);
  CHECK(snap_node(0.55, 4, false) == 2);
  CHECK(snap_node(0.7, 4, false) == 3);
  CHECK(snap_node(0.625, 4, false) == 2);  // exact midpoint ties low
  CHECK(snap_node(0.01, 4, true) == 0);
  CHECK(snap_node(0.01, 4, false) == 1);
  Grid grid(4);
  Sample ramp{ramp_path(4)};
  CHECK(eval_atom(parse_atom("pt(0.5)"), ramp, grid) == doctest::Approx(0.5));
}

TEST_CASE("classification") {
  FunctionalExpr ex21 =
      composite(parse_multi("sin(y1)*exp(y2^2)", 2),
                {parse_atom("int(x^3;0,0.5)"), parse_atom("int(x;0,1)")});
  CHECK(classify(ex21) == FunctionalClass::PurelyIntegral);
  FunctionalExpr pointwise = composite(
      parse_multi("y1+sin(y2*exp(y3))", 3),
      {parse_atom("pt(0.1)"), parse_atom("pt(0.2)"), parse_atom("pt(0.75)")});
  CHECK(classify(pointwise) == FunctionalClass::PurelyPointwise);
  FunctionalExpr mixed =
      composite(parse_multi("y1*y2", 2),
                {parse_atom("pt(0.5)"), parse_atom("int(x;0,1)")});
  CHECK(classify(mixed) == FunctionalClass::MixedPointwise);
}

TEST_CASE("linearity over integral atoms") {
  Grid grid(16);
  RngStream rng(21);
  Sample s = sample(BoundedUniform{0.0, 1.0}, 16, rng);
  double a = eval_atom(parse_atom("int(x;0,1)"), s, grid);
  double b = eval_atom(parse_atom("int(x^2;0,1)"), s, grid);
  FunctionalExpr lin =
      composite(parse_multi("2*y1+3*y2", 2),
                {parse_atom("int(x;0,1)"), parse_atom("int(x^2;0,1)")});
  CHECK(eval_functional(lin, s, grid) == doctest::Approx(2.0 * a + 3.0 * b));
}

TEST_CASE("refinement consistency on the ramp") {
  for (int n : {16, 32, 64}) {
    Grid grid(n);
    double v = eval_atom(parse_atom("int(x;0,1)"), Sample{ramp_path(n)}, grid);
    CHECK(v == doctest::Approx((n + 1.0) / (2.0 * n)));
    CHECK(std::abs(v - 0.5) <= 1.0 / (2.0 * n));
  }
}

TEST_CASE("half-open intervals tile without double counting") {
  Grid grid(10);
  RngStream rng(22);
  Sample s = sample(BoundedUniform{0.0, 1.0}, 10, rng);
  double full = eval_atom(parse_atom("int(x^2;0,1)"), s, grid);
  double left = eval_atom(parse_atom("int(x^2;0,0.5)"), s, grid);
  double right = eval_atom(parse_atom("int(x^2;0.5,1)"), s, grid);
  CHECK(full == doctest::Approx(left + right).epsilon(1e-12));
}

TEST_CASE("multi-integral budget cap") {
  Grid grid(1000);
  PathSample p = constant_path(1000, 0.5);
  FunctionalExpr three = single_atom(parse_atom("mint(y1*y2*y3;0,1;0,1;0,1)"));
  CHECK_THROWS_AS(eval_functional(three, Sample{p}, grid), BudgetError);
  Grid small(8);
  PathSample q = constant_path(8, 0.5);
  CHECK(eval_functional(three, Sample{q}, small) ==
        doctest::Approx(0.125));
}

TEST_CASE("layer and band models agree on integral means") {
  FunctionalExpr f = fmean::single_atom(parse_atom("int(x^2;0,1)"));
  EstimateReport band = estimate(BoundedUniform{0.0, 1.0}, f, 64, 5000, 23);
  EstimateReport layer = estimate(LayerSimplex{}, f, 64, 5000, 24);
  double combined =
      std::sqrt(band.stderr_ * band.stderr_ + layer.stderr_ * layer.stderr_);
  CHECK(std::abs(band.mc_mean - layer.mc_mean) <= 4.0 * combined + 1.0 / 32.0);
}
