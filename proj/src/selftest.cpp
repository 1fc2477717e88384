#include "fmean/selftest.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <numbers>

#include "fmean/montecarlo.hpp"
#include "fmean/runner.hpp"

namespace fmean {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Crit {
  CriterionResult res;

  Crit(int idx, std::string name) {
    res.index = idx;
    res.name = std::move(name);
  }
  void check(bool ok, const std::string& label) {
    if (!ok) res.passed = false;
    res.details.push_back(std::string(ok ? "pass: " : "FAIL: ") + label);
  }
  void note(const std::string& line) { res.details.push_back("note: " + line); }
};

long budget(bool quick, long N) { return quick ? std::max<long>(100, N / 10) : N; }

FunctionalExpr fx(const std::string& s) { return single_atom(parse_atom(s)); }

FunctionalExpr comp(const std::string& h, std::vector<std::string> atoms) {
  std::vector<Atom> parsed;
  for (const auto& a : atoms) parsed.push_back(parse_atom(a));
  return composite(parse_multi(h, static_cast<int>(parsed.size())),
                   std::move(parsed));
}

// Streaming mean/stderr for direct moment loops.
struct Acc {
  double sum = 0.0, sum2 = 0.0;
  long n = 0;
  void add(double v) {
    sum += v;
    sum2 += v * v;
    ++n;
  }
  double mean() const { return sum / n; }
  double se() const {
    double m = mean();
    double var = std::max(0.0, (sum2 - n * m * m) / (n - 1));
    return std::sqrt(var / n);
  }
};

bool within_se(Crit& c, const std::string& what, const Acc& acc, double target,
               double k) {
  double dev = std::abs(acc.mean() - target);
  bool ok = dev <= k * acc.se();
  c.check(ok, what + ": mean " + num(acc.mean()) + " vs " + num(target) +
                  ", |dev| " + num(dev) + " <= " + num(k) + "*stderr " +
                  num(k * acc.se()));
  return ok;
}

void crit1(Crit& c, bool quick, int workers) {
  BoundedUniform band{0.0, 1.0};
  long N = budget(quick, 100000);
  const int ns[] = {16, 64, 256};
  VarianceDecay vd = variance_decay(band, fx("int(x;0,1)"), ns, N, 101, workers);
  EstimateReport rep = estimate(band, fx("int(x;0,1)"), 256, N, 101, workers);
  double dev = std::abs(rep.mc_mean - 0.5);
  c.check(dev <= 4.0 * rep.stderr_,
          "mean of int(x;0,1) at n=256: " + num(rep.mc_mean) +
              ", |dev from 0.5| " + num(dev) + " <= 4*stderr " +
              num(4.0 * rep.stderr_));
  for (std::size_t i = 0; i < vd.n_list.size(); ++i) {
    double scaled = 12.0 * vd.n_list[i] * vd.variances[i];
    c.check(scaled >= 0.9 && scaled <= 1.1,
            "12*n*Var at n=" + std::to_string(vd.n_list[i]) + ": " +
                num(scaled) + " in [0.9, 1.1]");
  }
  c.check(vd.slope >= -1.15 && vd.slope <= -0.85,
          "variance decay slope " + num(vd.slope) + " in [-1.15, -0.85]");
}

void crit2(Crit& c, bool quick, int workers) {
  BoundedUniform band{0.0, 1.0};
  FunctionalExpr f1 =
      comp("exp(tan(y1))*sin(cos(y2))", {"int(x;0,1)", "int(x^3;0,1)"});
  FunctionalExpr f2 =
      comp("sin(y1)*exp(y2^2)", {"int(x^3;0,0.5)", "int(x;0,1)"});
  double v1 = std::exp(std::tan(0.5)) * std::sin(std::cos(0.25));
  double v2 = std::exp(0.25) * std::sin(0.125);
  double a1 = functional_mean(band, f1).mean;
  double a2 = functional_mean(band, f2).mean;
  c.check(std::abs(a1 - v1) <= 1e-9, "exchange value " + num(a1) + " vs exp(tan(1/2))sin(cos(1/4)) = " + num(v1) + " to 1e-9");
  c.check(std::abs(a2 - v2) <= 1e-9, "exchange value " + num(a2) + " vs exp(1/4)sin(1/8) = " + num(v2) + " to 1e-9");
  long N = budget(quick, 10000);
  EstimateReport r1 = estimate(band, f1, 1024, N, 102, workers);
  EstimateReport r2 = estimate(band, f2, 1024, N, 102, workers);
  c.check(std::abs(r1.mc_mean - v1) <= 0.01 * std::abs(v1),
          "MC " + num(r1.mc_mean) + " within 1% of " + num(v1));
  c.check(std::abs(r2.mc_mean - v2) <= 0.01 * std::abs(v2),
          "MC " + num(r2.mc_mean) + " within 1% of " + num(v2));
}

void crit3(Crit& c, bool quick, int workers) {
  LayerSimplex layer;
  long N = budget(quick, 100000);
  const int n = 32;
  Acc z1, z1z2, z1sq;
  for (long i = 0; i < N; ++i) {
    RngStream rng(103, static_cast<std::uint64_t>(i));
    auto s = std::get<LayerSample>(sample(layer, n, rng));
    z1.add(s.weights[0]);
    z1z2.add(s.weights[0] * s.weights[1]);
    z1sq.add(s.weights[0] * s.weights[0]);
  }
  within_se(c, "E(z1) at n=32", z1, 1.0 / n, 5.0);
  within_se(c, "E(z1 z2) at n=32", z1z2, 1.0 / (n * (n + 1.0)), 5.0);
  within_se(c, "E(z1^2) at n=32", z1sq, 2.0 / (n * (n + 1.0)), 5.0);
  std::vector<double> kept;
  for (int nn : {16, 64, 256}) {
    std::vector<double> values =
        collect_values(layer, fx("int(x;0,1)"), nn, N, 103, workers);
    Acc acc;
    for (double v : values) acc.add(v);
    within_se(c, "MC mean of int(x;0,1) at n=" + std::to_string(nn), acc,
              (nn + 1.0) / (2.0 * nn), 4.0);
    if (nn == 256) kept = std::move(values);
  }
  long low = 0, high = 0;
  for (double v : kept) {
    if (v >= 0.25 && v <= 1.0 / 3.0) ++low;
    if (v >= 1.0 / 3.0 && v <= 0.6) ++high;
  }
  double p_low = static_cast<double>(low) / kept.size();
  double p_high = static_cast<double>(high) / kept.size();
  c.check(p_low <= 0.01, "P(1/4 <= Y <= 1/3) at n=256: " + num(p_low) + " <= 0.01");
  c.check(p_high >= 0.99, "P(1/3 <= Y <= 3/5) at n=256: " + num(p_high) + " >= 0.99");
}

void crit4(Crit& c, bool quick, int workers) {
  DerivConstrained dc;
  long N = budget(quick, 100000);
  struct Case {
    const char* atom;
    double target;
    const char* what;
  } cases[] = {
      {"int(x;0,1)", 0.25, "path mean int(x;0,1)"},
      {"int(x^2;0,1)", 1.0 / 12.0, "path mean int(x^2;0,1)"},
      {"dint(sqrt(1+x^2);0,1)",
       std::numbers::sqrt2 / 2.0 + 0.5 * std::log(1.0 + std::numbers::sqrt2),
       "arc length dint(sqrt(1+x^2);0,1)"},
  };
  for (const Case& cs : cases) {
    EstimateReport rep = estimate(dc, fx(cs.atom), 256, N, 104, workers);
    double dev = std::abs(rep.mc_mean - cs.target);
    c.check(dev <= 4.0 * rep.stderr_,
            std::string(cs.what) + " at n=256: " + num(rep.mc_mean) +
                ", |dev from " + num(cs.target) + "| " + num(dev) +
                " <= 4*stderr " + num(4.0 * rep.stderr_));
  }
  c.note(
      "the two path-mean checks carry a deterministic O(1/n) discretization "
      "offset of about 1/(4n) that exceeds 4*stderr at this budget; they are "
      "reported as observed");
  for (const char* g : {"x", "x^2", "sin(x)"}) {
    auto [stated, by_parts] = deriv_mean_two_forms(parse_scalar(g));
    c.check(std::abs(stated - by_parts) <= 1e-8,
            std::string("slope-mean forms for g=") + g + ": " + num(stated) +
                " vs " + num(by_parts) + " to 1e-8");
  }
  BoundedUniform band{0.0, 1.0};
  const int ns[] = {16, 64, 256};
  DivergenceScan scan =
      divergence_scan(band, fx("dq(x^2)"), ns, N, 104, workers);
  c.check(scan.exponent >= 1.8 && scan.exponent <= 2.2,
          "difference-quotient growth exponent " + num(scan.exponent) +
              " in [1.8, 2.2]" + (scan.divergent ? " (divergent)" : ""));
}

void crit5(Crit& c, bool quick, int workers) {
  IidDensity gauss{GaussianDist{0.3, 0.7}};
  double target = 0.3 * 0.3 + 0.7 * 0.7;
  double a = functional_mean(gauss, fx("int(x^2;0,1)")).mean;
  c.check(std::abs(a - target) <= 1e-9,
          "analytic mean of int(x^2;0,1): " + num(a) + " vs mu^2+sigma^2 = " +
              num(target));
  EstimateReport rep =
      estimate(gauss, fx("int(x^2;0,1)"), 256, budget(quick, 100000), 105,
               workers);
  double dev = std::abs(rep.mc_mean - target);
  c.check(dev <= 4.0 * rep.stderr_,
          "MC at n=256: " + num(rep.mc_mean) + ", |dev| " + num(dev) +
              " <= 4*stderr " + num(4.0 * rep.stderr_));
  FunctionalExpr f = comp("sin(y1)", {"int(x^2;0,1)"});
  double ex = functional_mean(gauss, f).mean;
  c.check(std::abs(ex - std::sin(target)) <= 1e-9,
          "exchange value " + num(ex) + " vs sin(mu^2+sigma^2) = " +
              num(std::sin(target)));
  EstimateReport rex = estimate(gauss, f, 1024, budget(quick, 10000), 105,
                                workers);
  c.check(std::abs(rex.mc_mean - std::sin(target)) <=
              0.01 * std::abs(std::sin(target)),
          "MC of sin composite at n=1024: " + num(rex.mc_mean) +
              " within 1% of " + num(std::sin(target)));
}

void crit6(Crit& c, bool quick, int workers) {
  Codim1 space{parse_scalar("1+x"), 1.0};
  long N = budget(quick, 100000);
  std::vector<double> coords =
      collect_values(space, fx("pt(0.5)"), 512, N, 106, workers);
  Density ref = coordinate_density(space, 0.5, 512).density;
  double ks = ks_statistic(std::move(coords), ref);
  c.check(ks < 0.02, "coordinate KS vs Exponential(a(0.5)/s) at n=512: " +
                         num(ks) + " < 0.02");
  double ln2 = std::log(2.0);
  AnalyticResult ar = functional_mean(space, fx("lin(1;0,1)"));
  c.check(std::abs(ar.mean - ln2) <= 1e-9,
          "analytic mean of lin(1;0,1): " + num(ar.mean) + " vs ln 2 = " +
              num(ln2));
  // O(1/n) simplex bias of about -1/(4n) forces a large n for the 4-sigma gate
  EstimateReport rep =
      estimate(space, fx("lin(1;0,1)"), 16384, budget(quick, 10000), 106,
               workers);
  double dev = std::abs(rep.mc_mean - ln2);
  c.check(dev <= 4.0 * rep.stderr_,
          "MC at n=16384: " + num(rep.mc_mean) + ", |dev from ln 2| " +
              num(dev) + " <= 4*stderr " + num(4.0 * rep.stderr_));
  CodimConsistency cons = codim_consistency(SpaceModel{space});
  c.check(cons.r1 <= 1e-8,
          "weighted-marginal consistency residual " + num(cons.r1) + " <= 1e-8");
}

void crit7(Crit& c, bool quick, int workers) {
  Codim2 space{parse_scalar("1"), parse_scalar("x"), 1.0, 0.85};
  WellPosedReport wp = well_posed(space);
  std::string diag;
  for (const auto& d : wp.diagnostics) diag += " " + d;
  c.check(wp.ok, "instance a=1, b=t, r=1, s=0.85 is well posed" + diag);
  const int n = 64;
  long draws = quick ? 50 : 200;
  double worst = 0.0;
  SampleStats stats;
  for (long i = 0; i < draws; ++i) {
    RngStream rng(107, static_cast<std::uint64_t>(i));
    Sample s = sample(space, n, rng, &stats);
    worst = std::max(worst, constraint_residual(space, s));
  }
  c.check(worst <= 1e-9, "max constraint residual over " +
                             std::to_string(draws) + " samples at n=64: " +
                             num(worst) + " <= 1e-9 (rejections: " +
                             std::to_string(stats.rejections) + ")");
  // three-way table: the linear closed form applies to the weighted linear
  // row, the stated marginal-density form to the composition row; numerical
  // agreement between columns is deliberately not asserted
  long N = budget(quick, 20000);
  double lin_closed = atom_mean(space, parse_atom("lin(1;0,1)")).mean;
  double lin_mc = estimate(space, fx("lin(1;0,1)"), n, N, 107, workers).mc_mean;
  double den_closed =
      atom_mean(space, parse_atom("int(exp(-10*x);0,1)")).mean;
  double den_mc =
      estimate(space, fx("int(exp(-10*x);0,1)"), n, N, 107, workers).mc_mean;
  c.note("table: functional           | linear form | density form | MC");
  c.note("table: lin(1;0,1)           | " + num(lin_closed) + " | n/a | " +
         num(lin_mc));
  c.note("table: int(exp(-10*x);0,1)  | n/a | " + num(den_closed) + " | " +
         num(den_mc));
  bool finite = std::isfinite(lin_closed) && std::isfinite(lin_mc) &&
                std::isfinite(den_closed) && std::isfinite(den_mc);
  c.check(finite, "comparison table emitted with all cells finite");
}

void crit8(Crit& c, bool quick, int workers) {
  long N = budget(quick, 100000);
  for (double R : {1.0, 2.0}) {
    Ball2 ball{R};
    std::vector<double> coords =
        collect_values(ball, fx("pt(0.5)"), 512, N, 108, workers);
    double ks = ks_statistic(std::move(coords), GaussianDensity{0.0, R * R});
    c.check(ks < 0.02, "coordinate KS vs Gaussian(0," + num(R * R) +
                           ") at n=512, R=" + num(R) + ": " + num(ks) +
                           " < 0.02");
  }
  Ball2 ball{2.0};
  EstimateReport lin = estimate(ball, fx("int(x;0,1)"), 256, N, 108, workers);
  c.check(std::abs(lin.mc_mean) <= 4.0 * lin.stderr_,
          "mean of int(x;0,1): " + num(lin.mc_mean) + " within 4*stderr " +
              num(4.0 * lin.stderr_) + " of 0");
  EstimateReport sq = estimate(ball, fx("int(x^2;0,1)"), 256, N, 108, workers);
  c.check(std::abs(sq.mc_mean - 4.0) <= 0.04,
          "mean of int(x^2;0,1): " + num(sq.mc_mean) + " within 1% of R^2 = 4");
  const int n = 32;
  Acc m2, m4;
  for (long i = 0; i < N; ++i) {
    RngStream rng(1080, static_cast<std::uint64_t>(i));
    auto s = std::get<PathSample>(sample(Ball2{1.0}, n, rng));
    double x = s.values[0];
    m2.add(x * x);
    m4.add(x * x * x * x);
  }
  within_se(c, "finite-n E(x_k^2) at n=32, R=1", m2,
            ball_even_moment(n, 1, 1.0), 5.0);
  within_se(c, "finite-n E(x_k^4) at n=32, R=1", m4,
            ball_even_moment(n, 2, 1.0), 5.0);
  FunctionalExpr two = fx("mint(y1*y2;0,0.5;0.5,1)");
  double a = functional_mean(Ball2{1.0}, two).mean;
  c.check(std::abs(a) <= 1e-12,
          "analytic mean of mint(y1*y2;0,0.5;0.5,1): " + num(a) + " = 0");
  EstimateReport rep =
      estimate(Ball2{1.0}, two, 64, budget(quick, 5000), 108, workers);
  c.check(std::abs(rep.mc_mean) <= 4.0 * rep.stderr_,
          "MC of the two-variable atom: " + num(rep.mc_mean) +
              " within 4*stderr " + num(4.0 * rep.stderr_) + " of 0");
}

void crit9(Crit& c, bool quick, int workers) {
  CauchySpace space;
  long N = budget(quick, 100000);
  for (int n : {4, 64, 256}) {
    std::vector<double> values =
        collect_values(space, fx("int(x;0,1)"), n, N, 109, workers);
    double ks = ks_statistic(std::move(values), CauchyDensity{});
    c.check(ks < 0.01, "KS of int(x;0,1) values vs Cauchy at n=" +
                           std::to_string(n) + ": " + num(ks) + " < 0.01");
  }
  double worst = 0.0;
  for (int n : {2, 7, 32})
    for (double t = 0.25; t <= 10.0; t += 0.25)
      worst = std::max(worst, cauchy_selfsim_residual(t, n));
  c.check(worst <= 1e-12,
          "self-similarity residual over the t-grid: " + num(worst) +
              " <= 1e-12");
  double target = 1.0 / std::sqrt(std::numbers::pi);
  FunctionalExpr f = comp("(1+y1^2)*exp(-y1^2)", {"int(x;0,1)"});
  AnalyticResult ar = functional_mean(space, f);
  c.check(std::abs(ar.mean - target) <= 1e-10,
          "quadrature mean " + num(ar.mean) + " vs 1/sqrt(pi) = " +
              num(target) + " to 1e-10");
  EstimateReport rep = estimate(space, f, 64, N, 109, workers);
  c.check(std::abs(rep.mc_mean - target) <= 0.01 * target,
          "MC " + num(rep.mc_mean) + " within 1% of " + num(target));
  double second = law_weighted_mean(CauchyLaw{}, [](double y) {
    double v = (1.0 + y * y) * std::exp(-y * y);
    return v * v;
  });
  double second_target = 5.0 * std::numbers::sqrt2 / 8.0 /
                         std::sqrt(std::numbers::pi);
  c.check(std::abs(second - second_target) <= 1e-9,
          "second moment by quadrature " + num(second) + " vs (5 sqrt(2)/8)/sqrt(pi) = " +
              num(second_target));
  double alt = (std::numbers::sqrt2 / 8.0 + 0.5) /
               std::sqrt(std::numbers::pi);
  c.note("flagged discrepancy: the alternative closed-form constant (sqrt(2)/8 "
         "+ 1/2)/sqrt(pi) = " +
         num(alt) + " disagrees with the quadrature value; the quadrature "
                    "value is authoritative here");
}

void crit10(Crit& c, bool quick, int workers) {
  WienerSpace space;
  long N = budget(quick, 100000);
  EstimateReport sq = estimate(space, fx("int(x^2;0,1)"), 256, N, 110, workers);
  c.check(std::abs(sq.mc_mean - 0.5) <= 0.005,
          "mean of int(x^2;0,1): " + num(sq.mc_mean) + " within 1% of 1/2");
  c.check(std::abs(sq.mc_var - 1.0 / 3.0) <= 0.05 / 3.0,
          "variance of int(x^2;0,1): " + num(sq.mc_var) + " within 5% of 1/3");
  EstimateReport lin = estimate(space, fx("int(x;0,1)"), 256, N, 110, workers);
  c.check(std::abs(lin.mc_mean) <= 4.0 * lin.stderr_,
          "mean of int(x;0,1): " + num(lin.mc_mean) + " within 4*stderr " +
              num(4.0 * lin.stderr_) + " of 0");
  c.check(std::abs(lin.mc_var - 1.0 / 3.0) <= 0.05 / 3.0,
          "variance of int(x;0,1): " + num(lin.mc_var) + " within 5% of 1/3");
  const int n = 32;
  Acc sq8, sq16, sq32, q8, q16, q32, c816, c1632, c832;
  for (long i = 0; i < N; ++i) {
    RngStream rng(1100, static_cast<std::uint64_t>(i));
    auto s = std::get<PathSample>(sample(space, n, rng));
    double x8 = s.values[7], x16 = s.values[15], x32 = s.values[31];
    sq8.add(x8 * x8);
    sq16.add(x16 * x16);
    sq32.add(x32 * x32);
    q8.add(std::pow(x8, 4));
    q16.add(std::pow(x16, 4));
    q32.add(std::pow(x32, 4));
    c816.add(x8 * x8 * x16 * x16);
    c1632.add(x16 * x16 * x32 * x32);
    c832.add(x8 * x8 * x32 * x32);
  }
  within_se(c, "E(x_8^2)", sq8, wiener_moment(WienerMomentKind::Sq, 8, 0, n), 5.0);
  within_se(c, "E(x_16^2)", sq16, wiener_moment(WienerMomentKind::Sq, 16, 0, n), 5.0);
  within_se(c, "E(x_32^2)", sq32, wiener_moment(WienerMomentKind::Sq, 32, 0, n), 5.0);
  within_se(c, "E(x_8^4)", q8, wiener_moment(WienerMomentKind::Quad, 8, 0, n), 5.0);
  within_se(c, "E(x_16^4)", q16, wiener_moment(WienerMomentKind::Quad, 16, 0, n), 5.0);
  within_se(c, "E(x_32^4)", q32, wiener_moment(WienerMomentKind::Quad, 32, 0, n), 5.0);
  within_se(c, "E(x_16^2 x_8^2)", c816,
            wiener_moment(WienerMomentKind::Cross, 16, 8, n), 5.0);
  within_se(c, "E(x_32^2 x_16^2)", c1632,
            wiener_moment(WienerMomentKind::Cross, 32, 16, n), 5.0);
  within_se(c, "E(x_32^2 x_8^2)", c832,
            wiener_moment(WienerMomentKind::Cross, 32, 8, n), 5.0);
  ExchangeGap bad = exchange_gap(space, comp("sin(y1)", {"int(x^2;0,1)"}), 256,
                                 N, 110, workers);
  c.check(bad.gap > 0.01, "exchange gap for sin(int(x^2;0,1)): " +
                              num(bad.gap) + " > 0.01 (formula fails here)");
  BoundedUniform band{0.0, 1.0};
  ExchangeGap good = exchange_gap(band, comp("sin(y1)", {"int(x;0,1)"}), 1024,
                                  budget(quick, 10000), 110, workers);
  c.check(good.gap <= 3.0 * good.stderr_ + 0.001,
          "exchange gap on the bounded band at n=1024: " + num(good.gap) +
              " <= 3*stderr + 0.001 = " + num(3.0 * good.stderr_ + 0.001));
}

void crit11(Crit& c, bool quick, int workers) {
  double prev = std::numeric_limits<double>::infinity();
  bool decreasing = true;
  std::string sups;
  for (int n : {4, 16, 64, 256}) {
    double sup = 0.0;
    for (double t = -10.0; t <= 10.0; t += 0.05)
      sup = std::max(sup, std::abs(charfn_uniform_mean(t, n) -
                                   charfn_uniform_mean(t, std::nullopt)));
    sups += " n=" + std::to_string(n) + ":" + num(sup);
    if (sup >= prev) decreasing = false;
    prev = sup;
  }
  c.check(decreasing,
          "sup_t |phi_n(t) - e^{it/2}| strictly decreasing:" + sups);
  std::vector<double> values = collect_values(
      CauchySpace{}, fx("int(x;0,1)"), 64, budget(quick, 100000), 111, workers);
  double grid[1] = {1.0};
  std::complex<double> emp = empirical_cf(values, grid)[0];
  double dev = std::abs(emp - std::complex<double>(std::exp(-1.0), 0.0));
  c.check(dev <= 0.02, "empirical CF of Cauchy int(x;0,1) at t=1: |dev from "
                       "e^{-1}| = " +
                           num(dev) + " <= 0.02");
}

std::vector<CriterionResult> run_core(bool quick, int workers);

void crit12(Crit& c, bool quick, int workers, double quick_elapsed) {
  std::vector<ExperimentPlan> plans = parse_config_text(demo_config_text());
  std::string first = emit_report(run_plan(plans, 1), ReportFormat::Csv);
  std::string second = emit_report(run_plan(plans, 1), ReportFormat::Csv);
  std::string parallel = emit_report(run_plan(plans, 8), ReportFormat::Csv);
  c.check(first == second, "bundled config: two serial runs byte-identical (" +
                               std::to_string(first.size()) + " bytes)");
  c.check(first == parallel,
          "bundled config: workers 1 vs 8 byte-identical output");
  if (!quick) {
    auto t0 = std::chrono::steady_clock::now();
    run_core(true, workers);
    quick_elapsed = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
  }
  c.check(quick_elapsed < 180.0,
          "quick suite finished in " + num(quick_elapsed) + " s < 180 s");
}

template <class F>
CriterionResult guarded(int idx, const char* name, F&& body) {
  Crit c(idx, name);
  try {
    body(c);
  } catch (const std::exception& e) {
    c.res.passed = false;
    c.res.details.push_back(std::string("FAIL: unhandled error: ") + e.what());
  }
  return c.res;
}

std::vector<CriterionResult> run_core(bool quick, int workers) {
  std::vector<CriterionResult> out;
  out.push_back(guarded(1, "band-uniform concentration",
                        [&](Crit& c) { crit1(c, quick, workers); }));
  out.push_back(guarded(2, "nonlinear exchange closed forms",
                        [&](Crit& c) { crit2(c, quick, workers); }));
  out.push_back(guarded(3, "layer simplex model",
                        [&](Crit& c) { crit3(c, quick, workers); }));
  out.push_back(guarded(4, "derivative-constrained paths",
                        [&](Crit& c) { crit4(c, quick, workers); }));
  out.push_back(guarded(5, "iid density model",
                        [&](Crit& c) { crit5(c, quick, workers); }));
  out.push_back(guarded(6, "codim-1 hyperplane",
                        [&](Crit& c) { crit6(c, quick, workers); }));
  out.push_back(guarded(7, "codim-2 comparison table",
                        [&](Crit& c) { crit7(c, quick, workers); }));
  out.push_back(guarded(8, "L2 ball model",
                        [&](Crit& c) { crit8(c, quick, workers); }));
  out.push_back(guarded(9, "cauchy stability",
                        [&](Crit& c) { crit9(c, quick, workers); }));
  out.push_back(guarded(10, "wiener variance persistence",
                        [&](Crit& c) { crit10(c, quick, workers); }));
  out.push_back(guarded(11, "characteristic functions",
                        [&](Crit& c) { crit11(c, quick, workers); }));
  return out;
}

}  // namespace

SelftestSummary run_selftest(bool quick, int workers) {
  if (workers < 1) workers = 1;
  SelftestSummary summary;
  auto t0 = std::chrono::steady_clock::now();
  summary.criteria = run_core(quick, workers);
  double elapsed11 =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  summary.criteria.push_back(
      guarded(12, "determinism and runtime",
              [&](Crit& c) { crit12(c, quick, workers, elapsed11); }));
  summary.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return summary;
}

const std::string& demo_config_text() {
  static const std::string text = R"json({
  "experiments": [
    {
      "id": "band-mean",
      "space": {"kind": "bounded_uniform", "m1": 0, "m2": 1},
      "functional": "int(x;0,1)",
      "n_list": [16, 64, 256],
      "N": 2000,
      "seed": 7,
      "checks": ["mean", "variance_decay"]
    },
    {
      "id": "layer-events",
      "space": {"kind": "layer_simplex"},
      "functional": "int(x;0,1)",
      "n_list": [256],
      "N": 2000,
      "seed": 7,
      "checks": ["events"],
      "event": [0.3333333333333333, 0.6]
    },
    {
      "id": "cauchy-heavy",
      "space": {"kind": "cauchy"},
      "functional": "int(x;0,1)",
      "n_list": [64],
      "N": 1000,
      "seed": 7,
      "checks": ["mean", "ks", "cf"]
    },
    {
      "id": "wiener-gap",
      "space": {"kind": "wiener"},
      "functional": {"h": "sin(y1)", "atoms": ["int(x^2;0,1)"]},
      "n_list": [64],
      "N": 1000,
      "seed": 7,
      "checks": ["exchange_gap"]
    }
  ]
}
)json";
  return text;
}

}  // namespace fmean
