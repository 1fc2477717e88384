#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fmean/spaces.hpp"

using namespace fmean;

namespace {

struct Acc {
  double sum = 0.0, sum2 = 0.0;
  long n = 0;
  void add(double v) { sum += v; sum2 += v * v; ++n; }
  double mean() const { return sum / n; }
  double se() const {
    double m = mean();
    return std::sqrt(std::max(0.0, (sum2 - n * m * m) / (n - 1)) / n);
  }
};

}  // namespace

TEST_CASE("layer samples live on the simplex") {
  RngStream rng(1);
  LayerSimplex layer;
  auto s = std::get<LayerSample>(sample(layer, 4, rng));
  double sum = 0.0;
  for (int k = 0; k < 4; ++k) {
    CHECK(s.weights[k] >= 0.0);
    sum += s.weights[k];
  }
  CHECK(std::abs(sum - 1.0) <= 1e-12);
  CHECK(constraint_residual(layer, Sample{s}) <= 1e-12);
}

TEST_CASE("derivative-constrained samples integrate their slopes") {
  RngStream rng(2);
  auto s = std::get<DerivSample>(sample(DerivConstrained{}, 32, rng));
  double prev = 0.0;
  for (int k = 0; k < 32; ++k) {
    CHECK(s.deriv[k] >= 0.0);
    CHECK(s.deriv[k] <= 1.0);
    CHECK(s.path[k] >= prev);
    prev = s.path[k];
  }
}

TEST_CASE("codim-1 sampler moments") {
  Codim1 space{parse_scalar("1"), 1.0};
  const int n = 64;
  const long N = 100000;
  Acc x1, x1sq;
  for (long i = 0; i < N; ++i) {
    RngStream rng(3, static_cast<std::uint64_t>(i));
    auto s = std::get<PathSample>(sample(space, n, rng));
    x1.add(s.values[0]);
    x1sq.add(s.values[0] * s.values[0]);
    if (i < 100) CHECK(constraint_residual(space, Sample{s}) <= 1e-9);
  }
  CHECK(std::abs(x1.mean() - 1.0) <= 5.0 * x1.se());
  double target = 2.0 * n / (n + 1.0);  // 2ns^2/(n+1)
  CHECK(std::abs(x1sq.mean() - target) <= 5.0 * x1sq.se());
}

TEST_CASE("wiener sampler moments") {
  WienerSpace space;
  const int n = 256;
  const long N = 20000;
  Acc xsq;
  for (long i = 0; i < N; ++i) {
    RngStream rng(4, static_cast<std::uint64_t>(i));
    auto s = std::get<PathSample>(sample(space, n, rng));
    xsq.add(s.values[127] * s.values[127]);
  }
  CHECK(std::abs(xsq.mean() - 128.0 / 256.0) <= 5.0 * xsq.se());
}

TEST_CASE("coordinate densities per model") {
  auto cd = coordinate_density(Codim1{parse_scalar("1"), 1.0}, 0.5);
  CHECK(std::get<ExponentialDensity>(cd.density).rate == doctest::Approx(1.0));
  cd = coordinate_density(Ball2{1.0}, 0.3);
  auto g = std::get<GaussianDensity>(cd.density);
  CHECK(g.mu == 0.0);
  CHECK(g.var == doctest::Approx(1.0));
  cd = coordinate_density(WienerSpace{}, 0.5);
  CHECK(std::get<GaussianDensity>(cd.density).var == doctest::Approx(0.5));
  cd = coordinate_density(BoundedUniform{0.0, 2.0}, 0.9);
  CHECK(std::get<UniformDensity>(cd.density).b == doctest::Approx(2.0));
  cd = coordinate_density(DerivConstrained{}, 0.5, 64);
  CHECK(std::get<DiracDensity>(cd.density).c == doctest::Approx(0.25));
  CHECK(*cd.finite_n_variance == doctest::Approx(0.5 / (12.0 * 64)));
  CHECK_THROWS_AS(coordinate_density(LayerSimplex{}, 0.5), UnsupportedQuery);
}

TEST_CASE("densities normalize to one") {
  auto mass = [](const Density& d, double lo, double hi) {
    return quad_adaptive([&d](double x) { return pdf(d, x); }, lo, hi, 1e-10)
        .value;
  };
  CHECK(std::abs(mass(UniformDensity{0.0, 1.0}, 0.0, 1.0) - 1.0) <= 1e-8);
  CHECK(std::abs(mass(GaussianDensity{0.3, 2.0}, -15.0, 15.0) - 1.0) <= 1e-8);
  // exponential over a long finite window plus the analytic tail
  double lam = 1.7;
  CHECK(std::abs(mass(ExponentialDensity{lam}, 0.0, 40.0) +
                 std::exp(-lam * 40.0) - 1.0) <= 1e-8);
  // cauchy via the arctan substitution y = tan(u)
  Density cauchy = CauchyDensity{};
  double c = quad_adaptive(
                 [&cauchy](double u) {
                   double t = std::tan(u);
                   double sec2 = 1.0 + t * t;
                   return pdf(cauchy, t) * sec2;
                 },
                 -std::numbers::pi / 2.0 + 1e-12,
                 std::numbers::pi / 2.0 - 1e-12, 1e-10)
                 .value;
  CHECK(std::abs(c - 1.0) <= 1e-8);
  int n = 32;
  double sup = std::sqrt(static_cast<double>(n));
  CHECK(std::abs(mass(BallMarginal{n, 1.0}, -sup, sup) - 1.0) <= 1e-8);
}

TEST_CASE("finite-n ball marginal CDF") {
  BallMarginal bm{32, 1.0};
  CHECK(cdf(bm, 0.0) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(cdf(bm, -std::sqrt(32.0)) == doctest::Approx(0.0));
  CHECK(cdf(bm, std::sqrt(32.0)) == doctest::Approx(1.0));
  CHECK(cdf(bm, 1.0) > cdf(bm, 0.5));
}

TEST_CASE("codim-2 well-posedness diagnostics") {
  Codim2 stated{parse_scalar("1"), parse_scalar("x"), 1.0, 0.4};
  CHECK(well_posed(stated).ok);
  Codim2 degenerate{parse_scalar("1+x"), parse_scalar("1+x"), 1.0, 1.0};
  CHECK_FALSE(well_posed(degenerate).ok);
  Codim2 zero_rhs{parse_scalar("1"), parse_scalar("x"), 0.0, 0.0};
  CHECK_FALSE(well_posed(zero_rhs).ok);
}

TEST_CASE("codim-2 sampling satisfies both constraints") {
  Codim2 space{parse_scalar("1"), parse_scalar("x"), 1.0, 0.85};
  const int n = 16;
  for (long i = 0; i < 50; ++i) {
    RngStream rng(5, static_cast<std::uint64_t>(i));
    auto s = std::get<PathSample>(sample(space, n, rng));
    for (int k = 0; k < n; ++k) CHECK(s.values[k] >= 0.0);
    CHECK(constraint_residual(space, Sample{s}) <= 1e-9);
  }
  // sign-inconsistent instance refuses to sample
  Codim2 bad{parse_scalar("1"), parse_scalar("x"), 1.0, 1.5};
  RngStream rng(6);
  CHECK_THROWS_AS(sample(bad, 16, rng), IllPosedConstraint);
}

TEST_CASE("sampling is deterministic per stream") {
  for (const SpaceModel& space :
       {SpaceModel{BoundedUniform{0.0, 1.0}}, SpaceModel{WienerSpace{}},
        SpaceModel{LayerSimplex{}}, SpaceModel{CauchySpace{}}}) {
    RngStream a(9, 17), b(9, 17);
    Sample sa = sample(space, 32, a), sb = sample(space, 32, b);
    double ra = constraint_residual(space, sa);
    CHECK(ra == constraint_residual(space, sb));
    if (const auto* pa = std::get_if<PathSample>(&sa))
      CHECK(pa->values == std::get<PathSample>(sb).values);
  }
}

TEST_CASE("density means and samplers") {
  CHECK(density_mean(ExponentialDensity{2.0}) == doctest::Approx(0.5));
  CHECK(density_mean(DiracDensity{0.7}) == doctest::Approx(0.7));
  CHECK_THROWS_AS(density_mean(CauchyDensity{}), DivergentMean);
  RngStream rng(10);
  Acc acc;
  for (int i = 0; i < 20000; ++i)
    acc.add(sample_density(ExponentialDensity{2.0}, rng));
  CHECK(std::abs(acc.mean() - 0.5) <= 5.0 * acc.se());
}
