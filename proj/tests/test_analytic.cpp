#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "fmean/analytic.hpp"

using namespace fmean;

namespace {

FunctionalExpr fx(const char* atom) { return single_atom(parse_atom(atom)); }

FunctionalExpr comp(const char* h, std::vector<const char*> atoms) {
  std::vector<Atom> parsed;
  for (const char* a : atoms) parsed.push_back(parse_atom(a));
  return composite(parse_multi(h, static_cast<int>(parsed.size())), parsed);
}

}  // namespace

TEST_CASE("closed-form atom means") {
  SpaceModel band{BoundedUniform{0.0, 1.0}};
  CHECK(atom_mean(band, parse_atom("int(x;0,1)")).mean == doctest::Approx(0.5));
  CHECK(atom_mean(band, parse_atom("int(x^2;0,1)")).mean ==
        doctest::Approx(1.0 / 3.0));
  SpaceModel deriv{DerivConstrained{}};
  CHECK(atom_mean(deriv, parse_atom("int(x^2;0,1)")).mean ==
        doctest::Approx(1.0 / 12.0));
  SpaceModel cod1{Codim1{parse_scalar("1+x"), 1.0}};
  CHECK(atom_mean(cod1, parse_atom("lin(1;0,1)")).mean ==
        doctest::Approx(std::log(2.0)));
  SpaceModel ball{Ball2{2.0}};
  CHECK(atom_mean(ball, parse_atom("int(x^2;0,1)")).mean ==
        doctest::Approx(4.0));
  SpaceModel wiener{WienerSpace{}};
  CHECK(atom_mean(wiener, parse_atom("int(x^2;0,1)")).mean ==
        doctest::Approx(0.5));
  CHECK_THROWS_AS(atom_mean(band, parse_atom("dint(x;0,1)")),
                  UnsupportedQuery);
}

TEST_CASE("atom variances: zero, Wiener, absent") {
  SpaceModel layer{LayerSimplex{}};
  CHECK(atom_variance(layer, parse_atom("int(x;0,1)")) ==
        doctest::Approx(0.0));
  SpaceModel wiener{WienerSpace{}};
  CHECK(*atom_variance(wiener, parse_atom("int(x;0,1)")) ==
        doctest::Approx(1.0 / 3.0));
  CHECK(*atom_variance(wiener, parse_atom("int(x^2;0,1)")) ==
        doctest::Approx(1.0 / 3.0));
  SpaceModel cauchy{CauchySpace{}};
  CHECK_FALSE(atom_variance(cauchy, parse_atom("int(x;0,1)")).has_value());
}

TEST_CASE("functional laws and the Dirac gate") {
  SpaceModel band{BoundedUniform{0.0, 1.0}};
  Law law = functional_law(band, parse_atom("int(x;0,1)"));
  CHECK(std::get<DiracLaw>(law).c == doctest::Approx(0.5));
  SpaceModel cauchy{CauchySpace{}};
  CHECK(std::holds_alternative<CauchyLaw>(
      functional_law(cauchy, parse_atom("int(x;0,1)"))));
  CHECK(std::holds_alternative<CauchyLaw>(
      functional_law(cauchy, parse_atom("lin(1;0,1)"))));
  // variance 0 and a Dirac law go together
  for (const char* a : {"int(x;0,1)", "int(x^2;0,1)"}) {
    auto v = atom_variance(band, parse_atom(a));
    CHECK(v.has_value());
    CHECK(*v == 0.0);
    CHECK(std::holds_alternative<DiracLaw>(functional_law(band, parse_atom(a))));
  }
}

TEST_CASE("exchange formula on concentrating composites") {
  SpaceModel band{BoundedUniform{0.0, 1.0}};
  AnalyticResult r = exchange_mean(
      band, comp("exp(tan(y1))*sin(cos(y2))", {"int(x;0,1)", "int(x^3;0,1)"}));
  CHECK(r.mean ==
        doctest::Approx(std::exp(std::tan(0.5)) * std::sin(std::cos(0.25))));
  r = exchange_mean(
      band, comp("sin(y1)*exp(y2^2)", {"int(x^3;0,0.5)", "int(x;0,1)"}));
  CHECK(r.mean == doctest::Approx(std::exp(0.25) * std::sin(0.125)));
  // identity composite reduces to the atom mean
  CHECK(exchange_mean(band, comp("y1", {"int(x^2;0,1)"})).mean ==
        doctest::Approx(atom_mean(band, parse_atom("int(x^2;0,1)")).mean));
  SpaceModel wiener{WienerSpace{}};
  CHECK_THROWS_AS(exchange_mean(wiener, comp("sin(y1)", {"int(x^2;0,1)"})),
                  NonConcentrating);
}

TEST_CASE("partial exchange on mixed composites") {
  SpaceModel band{BoundedUniform{0.0, 1.0}};
  RngStream rng(31);
  // X(t0) + int x: E = 1/2 + 1/2 = 1
  AnalyticResult r = partial_exchange(
      band, comp("y1+y2", {"pt(0.3)", "int(x;0,1)"}), 64, 20000, rng);
  CHECK(std::abs(r.mean - 1.0) <= 0.02);
  // X(t0) * int x: E = (1/2)(1/2) = 1/4 by independence of the collapse
  r = partial_exchange(band, comp("y1*y2", {"pt(0.3)", "int(x;0,1)"}), 64,
                       20000, rng);
  CHECK(std::abs(r.mean - 0.25) <= 0.02);
  SpaceModel cauchy{CauchySpace{}};
  CHECK_THROWS_AS(partial_exchange(cauchy,
                                   comp("y1+y2", {"pt(0.3)", "int(x;0,1)"}),
                                   64, 1000, rng),
                  NonConcentrating);
}

TEST_CASE("midslope mean two ways") {
  auto [a, b] = deriv_mean_two_forms(parse_scalar("x"));
  CHECK(a == doctest::Approx(0.25));
  CHECK(b == doctest::Approx(0.25));
  auto [c, d] = deriv_mean_two_forms(parse_scalar("x^2"));
  CHECK(c == doctest::Approx(1.0 / 12.0));
  CHECK(d == doctest::Approx(1.0 / 12.0));
  auto [e, f] = deriv_mean_two_forms(parse_scalar("sin(x)"));
  double target = 2.0 * (1.0 - std::cos(0.5));
  CHECK(e == doctest::Approx(target));
  CHECK(f == doctest::Approx(target));
}

TEST_CASE("characteristic function of band means") {
  CHECK(std::abs(charfn_uniform_mean(0.0, 64) - 1.0) <= 1e-12);
  std::complex<double> limit = charfn_uniform_mean(2.0, std::nullopt);
  CHECK(limit.real() == doctest::Approx(std::cos(1.0)));
  CHECK(limit.imag() == doctest::Approx(std::sin(1.0)));
  double prev = 1.0;
  for (int n : {4, 16, 64, 1024}) {
    double gap = std::abs(charfn_uniform_mean(2.0, n) - limit);
    CHECK(gap < prev);
    prev = gap;
  }
}

TEST_CASE("cauchy self-similarity and interval measure") {
  CHECK(cauchy_selfsim_residual(3.0, 7) <= 1e-12);
  CHECK(cauchy_selfsim_residual(0.0, 5) <= 1e-12);
  CHECK(cauchy_selfsim_residual(100.0, 2) <= 1e-12);
  double inf = std::numeric_limits<double>::infinity();
  CHECK(cauchy_interval_measure(-inf, inf) == doctest::Approx(1.0));
  CHECK(cauchy_interval_measure(-1.0, 1.0) == doctest::Approx(0.5));
  CHECK(cauchy_interval_measure(0.0, 0.0) == doctest::Approx(0.0));
  CHECK_THROWS_AS(cauchy_interval_measure(1.0, -1.0), ParameterError);
}

TEST_CASE("constraint consistency residuals") {
  CHECK(codim_consistency(SpaceModel{Codim1{parse_scalar("1"), 1.0}}).r1 <=
        1e-8);
  CHECK(codim_consistency(SpaceModel{Codim1{parse_scalar("1+x"), 2.0}}).r1 <=
        1e-8);
  auto c2 = codim_consistency(
      SpaceModel{Codim2{parse_scalar("1"), parse_scalar("x"), 1.0, 0.85}});
  CHECK(std::isfinite(c2.r1));
  REQUIRE(c2.r2.has_value());
  CHECK(std::isfinite(*c2.r2));
  CHECK_FALSE(c2.method.empty());
}

TEST_CASE("even ball moments") {
  for (int n : {2, 8, 32}) {
    CHECK(ball_even_moment(n, 1, 1.0) == doctest::Approx(n / (n + 2.0)));
    CHECK(ball_even_moment(n, 1, 3.0) == doctest::Approx(9.0 * n / (n + 2.0)));
    // ratio of consecutive moments follows the recursion
    double ratio = ball_even_moment(n, 2, 1.5) / ball_even_moment(n, 1, 1.5);
    CHECK(ratio == doctest::Approx(n * 1.5 * 1.5 * 3.0 / (n + 4.0)));
  }
  CHECK(ball_even_moment(32, 0, 2.0) == doctest::Approx(1.0));
  CHECK(ball_even_moment(std::nullopt, 2, 1.0) == doctest::Approx(3.0));
  CHECK(ball_even_moment(std::nullopt, 1, 2.0) == doctest::Approx(4.0));
}

TEST_CASE("wiener coordinate moments") {
  int n = 8;
  for (int k = 1; k <= n; ++k) {
    double sq = wiener_moment(WienerMomentKind::Sq, k, 0, n);
    CHECK(sq == doctest::Approx(static_cast<double>(k) / n));
    CHECK(wiener_moment(WienerMomentKind::Quad, k, 0, n) ==
          doctest::Approx(3.0 * sq * sq));
  }
  CHECK(wiener_moment(WienerMomentKind::Cross, 2, 1, 4) ==
        doctest::Approx((2.0 * 1.0 + 2.0 * 1.0) / 16.0));
}

TEST_CASE("law-weighted means") {
  CHECK(law_weighted_mean(DiracLaw{0.4}, parse_scalar("sin(x)")) ==
        doctest::Approx(std::sin(0.4)));
  CHECK(law_weighted_mean(GaussianLaw{0.0, 1.0}, parse_scalar("x^2")) ==
        doctest::Approx(1.0));
  // bounded integrands against the heavy tail converge...
  CHECK(std::abs(law_weighted_mean(CauchyLaw{}, parse_scalar("1/(1+x^2)")) -
                 0.5) <= 1e-8);
  // ...the identity does not
  CHECK_THROWS_AS(law_weighted_mean(CauchyLaw{}, parse_scalar("x")),
                  DivergentMean);
}
