#include "fmean/analytic.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace fmean {

namespace {

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(12);
  out << v;
  return out.str();
}

// (1/pi) int g(y)/(1+y^2) dy over a symmetric truncation that doubles until
// the absolute tail contribution vanishes; tails that stop shrinking mark a
// divergent mean.
double cauchy_weighted_mean(const RealFn& g) {
  auto f = [&](double y) {
    return g(y) / (std::numbers::pi * (1.0 + y * y));
  };
  auto fabsval = [&](double y) { return std::abs(f(y)); };
  const double tol = 1e-12;
  double T = 8.0;
  double value = quad_adaptive(f, -T, T, tol).value;
  double prev_inc = std::numeric_limits<double>::infinity();
  int stalls = 0;
  while (T < 1.1e12) {
    double seg = quad_adaptive(f, T, 2.0 * T, tol).value +
                 quad_adaptive(f, -2.0 * T, -T, tol).value;
    double inc = quad_adaptive(fabsval, T, 2.0 * T, tol).value +
                 quad_adaptive(fabsval, -2.0 * T, -T, tol).value;
    value += seg;
    if (inc <= tol * (1.0 + std::abs(value))) return value;
    if (inc > 0.6 * prev_inc) {
      if (++stalls >= 4)
        throw DivergentMean("Cauchy-weighted integral has a non-vanishing tail");
    } else {
      stalls = 0;
    }
    prev_inc = inc;
    T *= 2.0;
  }
  throw DivergentMean("Cauchy-weighted integral did not converge");
}

// int_0^inf f by interval doubling; growing tails mark divergence.
double halfline_doubling(const RealFn& f) {
  const double tol = 1e-12;
  double T = 1.0;
  double value = quad_adaptive(f, 0.0, T, tol).value;
  double prev_inc = std::numeric_limits<double>::infinity();
  int stalls = 0;
  while (T < 1.1e12) {
    double seg = quad_adaptive(f, T, 2.0 * T, tol).value;
    double inc = quad_adaptive([&](double x) { return std::abs(f(x)); }, T,
                               2.0 * T, tol)
                     .value;
    value += seg;
    if (!std::isfinite(value) || std::abs(value) > 1e15)
      throw DivergentMean("half-line integral grows without bound");
    if (inc <= tol * (1.0 + std::abs(value))) return value;
    if (inc > 0.6 * prev_inc) {
      if (++stalls >= 4)
        throw DivergentMean("half-line integral has a non-vanishing tail");
    } else {
      stalls = 0;
    }
    prev_inc = inc;
    T *= 2.0;
  }
  throw DivergentMean("half-line integral did not converge");
}

AnalyticResult dirac(double mean, std::string method) {
  return {mean, 0.0, DiracLaw{mean}, std::move(method)};
}

double iid_expectation(const IidDist& dist, const ScalarFn& g) {
  struct V {
    const ScalarFn& g;
    double operator()(const GaussianDist& d) const {
      return quad_gauss_weighted([&](double x) { return g(x); }, d.mu, d.sigma)
          .value;
    }
    double operator()(const CauchyDist&) const {
      return cauchy_weighted_mean([&](double x) { return g(x); });
    }
    double operator()(const UniformDist& d) const {
      return quad_adaptive([&](double x) { return g(x); }, d.a, d.b).value /
             (d.b - d.a);
    }
  };
  return std::visit(V{g}, dist);
}

// Mean of one coordinate's limiting law; snapped point evaluations use this.
AnalyticResult point_mean(const SpaceModel& space, double t) {
  double tq = std::max(t, 1e-9);
  CoordinateDensity cd = coordinate_density(space, tq);
  return {density_mean(cd.density), std::nullopt, UnknownLaw{},
          "coordinate-marginal-mean"};
}

// Nested Gaussian-weighted quadrature for an m-argument integrand with every
// argument scaled by R.
double nested_gauss(const MultiFn& g, double R, int m) {
  std::vector<double> args(m, 0.0);
  std::function<double(int)> level = [&](int d) -> double {
    RealFn f = [&, d](double x) {
      args[d] = R * x;
      if (d + 1 == m) return g(args);
      return level(d + 1);
    };
    return quad_gauss_weighted(f, 0.0, 1.0, d == 0 ? 1e-10 : 1e-11).value;
  };
  return level(0);
}

}  // namespace

std::string law_str(const Law& law) {
  struct V {
    std::string operator()(const DiracLaw& l) const {
      return "dirac(" + fmt(l.c) + ")";
    }
    std::string operator()(const CauchyLaw&) const { return "cauchy"; }
    std::string operator()(const GaussianLaw& l) const {
      return "gaussian(" + fmt(l.mu) + "," + fmt(l.var) + ")";
    }
    std::string operator()(const UnknownLaw&) const { return "unknown"; }
  };
  return std::visit(V{}, law);
}

AnalyticResult atom_mean(const SpaceModel& space, const Atom& atom) {
  // point evaluations reduce to the coordinate marginal on any space that
  // has one
  if (const auto* pa = std::get_if<PointAtom>(&atom))
    return point_mean(space, pa->t);

  if (const auto* sp = std::get_if<BoundedUniform>(&space)) {
    if (const auto* a = std::get_if<IntegralAtom>(&atom)) {
      double band =
          quad_adaptive([&](double x) { return a->g(x); }, sp->m1, sp->m2)
              .value /
          (sp->m2 - sp->m1);
      return dirac(a->I.length() * band, "band-average");
    }
    if (const auto* a = std::get_if<WeightedLinearAtom>(&atom)) {
      double cint =
          quad_adaptive([&](double t) { return a->c(t); }, a->I.lo, a->I.hi)
              .value;
      return dirac(cint * 0.5 * (sp->m1 + sp->m2), "band-linear");
    }
  } else if (const auto* sp = std::get_if<IidDensity>(&space)) {
    if (const auto* a = std::get_if<IntegralAtom>(&atom)) {
      double m = iid_expectation(sp->dist, a->g);
      return dirac(a->I.length() * m, "density-weighted-quadrature");
    }
  } else if (std::get_if<LayerSimplex>(&space)) {
    if (const auto* a = std::get_if<IntegralAtom>(&atom)) {
      if (!a->I.is_full())
        throw UnsupportedQuery(
            "layer model supports only full-interval integrals");
      double m = quad_adaptive([&](double u) { return a->g(u); }, 0.0, 1.0).value;
      return dirac(m, "level-set-average");
    }
  } else if (std::get_if<DerivConstrained>(&space)) {
    if (const auto* a = std::get_if<IntegralAtom>(&atom)) {
      double m =
          quad_adaptive([&](double t) { return a->g(t / 2.0); }, a->I.lo,
                        a->I.hi)
              .value;
      return dirac(m, "midslope-path");
    }
    if (const auto* a = std::get_if<DerivIntegralAtom>(&atom)) {
      double m = quad_adaptive([&](double z) { return a->g(z); }, 0.0, 1.0).value;
      return dirac(a->I.length() * m, "uniform-slope-average");
    }
    if (const auto* a = std::get_if<DiffQuotAtom>(&atom)) {
      double m = quad_adaptive([&](double z) { return a->g(z); }, 0.0, 1.0).value;
      return dirac(m, "uniform-slope-average");
    }
  } else if (const auto* sp = std::get_if<Codim1>(&space)) {
    if (const auto* a = std::get_if<WeightedLinearAtom>(&atom)) {
      double m = sp->s *
                 quad_adaptive([&](double t) { return a->c(t) / sp->a(t); },
                               a->I.lo, a->I.hi)
                     .value;
      return dirac(m, "hyperplane-linear");
    }
    if (const auto* a = std::get_if<IntegralAtom>(&atom)) {
      RealFn inner = [&](double t) {
        double rate = sp->a(t) / sp->s;
        if (rate <= 0.0)
          throw ParameterError("codim-1 weight a(t) must be > 0 on (0,1]");
        return quad_exp_weighted([&](double x) { return a->g(x); }, rate, 1e-11)
            .value;
      };
      double m = quad_adaptive(inner, a->I.lo, a->I.hi, 1e-9).value;
      return dirac(m, "exp-marginal-iterated");
    }
  } else if (const auto* sp = std::get_if<Codim2>(&space)) {
    double a1 = sp->a(1.0), b1 = sp->b(1.0);
    double denom = b1 * sp->r - a1 * sp->s;
    if (denom == 0.0)
      throw IllPosedConstraint("codim-2 marginal rate denominator vanishes");
    if (const auto* a = std::get_if<WeightedLinearAtom>(&atom)) {
      if (!a->I.is_full())
        throw UnsupportedQuery("codim-2 linear form is full-interval only");
      // the integrand is 0/0 at t = 1, so the endpoint is trimmed
      double integral =
          quad_adaptive(
              [&](double t) {
                return (a1 * a->c(t) - sp->a(t)) /
                       (a1 * sp->b(t) - sp->a(t) * b1);
              },
              0.0, 1.0 - 1e-9, 1e-9)
              .value;
      double m = sp->r / a1 + (denom / a1) * integral;
      return dirac(m, "codim2-linear-elimination");
    }
    if (const auto* a = std::get_if<IntegralAtom>(&atom)) {
      if (!a->I.is_full())
        throw UnsupportedQuery("codim-2 density form is full-interval only");
      // Literal transcription of the stated density: the prefactor and the
      // exponent rate differ in sign, and both are kept as stated.
      RealFn inner = [&](double t) {
        double pref = (sp->a(t) * b1 - a1 * sp->b(t)) / denom;
        double expo = (a1 * sp->b(t) - b1 * sp->a(t)) / denom;
        if (pref == 0.0) return 0.0;
        if (expo > 0.0)
          return (pref / expo) *
                 quad_exp_weighted([&](double x) { return a->g(x); }, expo,
                                   1e-11)
                     .value;
        return halfline_doubling(
            [&](double x) { return a->g(x) * pref * std::exp(-expo * x); });
      };
      double m = quad_adaptive(inner, 0.0, 1.0, 1e-8).value;
      return dirac(m, "codim2-density-as-stated");
    }
  } else if (const auto* sp = std::get_if<Ball2>(&space)) {
    if (const auto* a = std::get_if<IntegralAtom>(&atom)) {
      double m =
          quad_gauss_weighted([&](double x) { return a->g(x); }, 0.0, sp->R)
              .value;
      return dirac(a->I.length() * m, "gauss-limit-marginal");
    }
    if (const auto* a = std::get_if<MultiIntegralAtom>(&atom)) {
      int arity = a->g.arity();
      if (arity < 1 || arity > 3)
        throw ParameterError("multi-integral arity must be 1..3");
      if (static_cast<int>(a->I.size()) != arity)
        throw ParameterError("multi-integral needs one interval per argument");
      double scale = 1.0;
      for (const Interval& I : a->I) scale *= I.length();
      double m = scale * nested_gauss(a->g, sp->R, arity);
      return dirac(m, "gauss-limit-multi");
    }
  } else if (std::get_if<CauchySpace>(&space)) {
    if (const auto* a = std::get_if<IntegralAtom>(&atom)) {
      double m = cauchy_weighted_mean([&](double x) { return a->g(x); });
      // the value concentrates only if g itself has a finite second moment
      try {
        double m2 = cauchy_weighted_mean(
            [&](double x) { double v = a->g(x); return v * v; });
        (void)m2;
        return dirac(a->I.length() * m, "cauchy-marginal-average");
      } catch (const DivergentMean&) {
        return {a->I.length() * m, std::nullopt, UnknownLaw{},
                "cauchy-marginal-average"};
      }
    }
    if (std::get_if<WeightedLinearAtom>(&atom))
      throw DivergentMean("linear forms of Cauchy coordinates have no mean");
  } else if (std::get_if<WienerSpace>(&space)) {
    if (const auto* a = std::get_if<IntegralAtom>(&atom)) {
      if (!a->I.is_full())
        throw UnsupportedQuery("Wiener integrals are full-interval only");
      if (a->g.is_var())
        return {0.0, 1.0 / 3.0, GaussianLaw{0.0, 1.0 / 3.0}, "wiener-linear"};
      if (a->g.is_square_of_var())
        return {0.5, 1.0 / 3.0, UnknownLaw{}, "wiener-quadratic"};
      throw UnsupportedQuery(
          "no closed Wiener form beyond the linear and squared path integrals");
    }
    if (const auto* a = std::get_if<WeightedLinearAtom>(&atom)) {
      if (!a->I.is_full())
        throw UnsupportedQuery("Wiener integrals are full-interval only");
      auto c0 = a->c.constant_value();
      if (!c0)
        throw UnsupportedQuery("Wiener linear forms need a constant weight");
      double var = (*c0) * (*c0) / 3.0;
      return {0.0, var, GaussianLaw{0.0, var}, "wiener-linear"};
    }
  }
  throw UnsupportedQuery("no closed form for " + atom_str(atom) + " on " +
                         space_name(space));
}

std::optional<double> atom_variance(const SpaceModel& space, const Atom& atom) {
  try {
    return atom_mean(space, atom).variance;
  } catch (const DivergentMean&) {
    return std::nullopt;
  }
}

Law functional_law(const SpaceModel& space, const Atom& atom) {
  if (std::get_if<CauchySpace>(&space)) {
    if (const auto* a = std::get_if<IntegralAtom>(&atom))
      if (a->I.is_full() && a->g.is_var()) return CauchyLaw{};
    if (const auto* a = std::get_if<WeightedLinearAtom>(&atom))
      if (a->I.is_full() && a->c.constant_value() == 1.0) return CauchyLaw{};
  }
  return atom_mean(space, atom).law;
}

AnalyticResult exchange_mean(const SpaceModel& space,
                             const FunctionalExpr& composite) {
  if (std::get_if<CauchySpace>(&space) || std::get_if<WienerSpace>(&space))
    throw NonConcentrating(
        "functionals on this space keep nonzero variance; the exchange "
        "formula does not apply");
  if (classify(composite) != FunctionalClass::PurelyIntegral)
    throw UnsupportedQuery(
        "the exchange formula applies to purely integral composites");
  std::vector<double> means(composite.atoms.size());
  for (std::size_t i = 0; i < composite.atoms.size(); ++i) {
    AnalyticResult r = atom_mean(space, composite.atoms[i]);
    if (!r.variance || *r.variance != 0.0)
      throw NonConcentrating("a child functional does not concentrate");
    means[i] = r.mean;
  }
  double value = composite.h ? (*composite.h)(means) : means[0];
  return dirac(value, "nonlinear-exchange");
}

AnalyticResult partial_exchange(const SpaceModel& space,
                                const FunctionalExpr& composite, int n, int N,
                                RngStream& rng) {
  if (std::get_if<CauchySpace>(&space) || std::get_if<WienerSpace>(&space))
    throw NonConcentrating(
        "functionals on this space keep nonzero variance; the exchange "
        "formula does not apply");
  if (N < 2) throw ParameterError("partial exchange needs N >= 2");
  std::vector<double> args(composite.atoms.size(), 0.0);
  std::vector<std::size_t> point_slots;
  std::vector<Density> point_laws;
  for (std::size_t i = 0; i < composite.atoms.size(); ++i) {
    if (const auto* pa = std::get_if<PointAtom>(&composite.atoms[i])) {
      double snapped =
          static_cast<double>(snap_node(pa->t, n, /*node0=*/false)) / n;
      point_slots.push_back(i);
      point_laws.push_back(coordinate_density(space, snapped, n).density);
    } else {
      args[i] = atom_mean(space, composite.atoms[i]).mean;
    }
  }
  double sum = 0.0, sumsq = 0.0;
  for (int it = 0; it < N; ++it) {
    for (std::size_t j = 0; j < point_slots.size(); ++j)
      args[point_slots[j]] = sample_density(point_laws[j], rng);
    double v = composite.h ? (*composite.h)(args) : args[0];
    sum += v;
    sumsq += v * v;
  }
  double mean = sum / N;
  double var = std::max(0.0, (sumsq - N * mean * mean) / (N - 1));
  double stderr_ = std::sqrt(var / N);
  return {mean, std::nullopt, UnknownLaw{},
          "partial-exchange stderr=" + fmt(stderr_)};
}

std::pair<double, double> deriv_mean_two_forms(const ScalarFn& g) {
  ScalarFn gp = differentiate(g);
  double form_a =
      g(0.5) -
      0.5 * quad_adaptive([&](double t) { return t * gp(t / 2.0); }, 0.0, 1.0)
                .value;
  double form_b =
      quad_adaptive([&](double t) { return g(t / 2.0); }, 0.0, 1.0).value;
  return {form_a, form_b};
}

std::complex<double> charfn_uniform_mean(double t, std::optional<int> n) {
  using namespace std::complex_literals;
  if (!n) return std::exp(0.5i * t);
  if (*n < 1) throw ParameterError("resolution must be >= 1");
  if (t == 0.0) return 1.0;
  double theta = t / *n;
  // (e^{i theta} - 1)/(i theta), with cos(theta)-1 kept cancellation-free
  std::complex<double> numer(-2.0 * std::pow(std::sin(theta / 2.0), 2),
                             std::sin(theta));
  std::complex<double> ratio = numer / (1i * theta);
  return std::pow(ratio, *n);
}

double cauchy_selfsim_residual(double t, int n) {
  if (n < 1) throw ParameterError("resolution must be >= 1");
  double lhs = std::exp(-std::abs(t));
  double rhs = std::pow(std::exp(-std::abs(t / n)), n);
  return std::abs(lhs - rhs);
}

double cauchy_interval_measure(double a, double b) {
  if (a > b) throw ParameterError("interval bounds out of order");
  return (std::atan(b) - std::atan(a)) / std::numbers::pi;
}

CodimConsistency codim_consistency(const SpaceModel& space) {
  if (const auto* sp = std::get_if<Codim1>(&space)) {
    // marginal mean is s/a(t); weighting by a(t) must recover the level s
    double integral =
        quad_adaptive([&](double t) { return sp->a(t) * (sp->s / sp->a(t)); },
                      0.0, 1.0)
            .value;
    return {std::abs(integral - sp->s), std::nullopt,
            "exp-marginal-vs-constraint"};
  }
  if (const auto* sp = std::get_if<Codim2>(&space)) {
    WellPosedReport rep = well_posed(*sp);
    if (!rep.ok)
      throw IllPosedConstraint(rep.diagnostics.empty()
                                   ? "ill-posed codim-2 instance"
                                   : rep.diagnostics.front());
    // the marginal mean integrals need not converge near t = 1, so both
    // residuals are reported from a fixed midpoint grid
    const int K = 1024;
    double sa = 0.0, sb = 0.0;
    for (int j = 0; j < K; ++j) {
      double t = (j + 0.5) / K;
      double m = 1.0 / codim2_rate(*sp, t);
      sa += sp->a(t) * m;
      sb += sp->b(t) * m;
    }
    CodimConsistency c;
    c.r1 = std::abs(sa / K - sp->r);
    c.r2 = std::abs(sb / K - sp->s);
    c.method = "midpoint-grid-1024";
    return c;
  }
  throw ParameterError("consistency residuals apply to codim-1/2 models only");
}

double ball_even_moment(std::optional<int> n, int m, double R) {
  if (m < 0) throw ParameterError("moment order must be >= 0");
  if (n && *n < 1) throw ParameterError("resolution must be >= 1");
  double val = 1.0;
  for (int i = 1; i <= m; ++i) {
    double factor = (2 * i - 1) * R * R;  // (2m-1)!! R^{2m} accumulated
    if (n) factor *= static_cast<double>(*n) / (*n + 2 * i);
    val *= factor;
  }
  return val;
}

double wiener_moment(WienerMomentKind kind, int k, int j, int n) {
  if (n < 1 || k < 1 || k > n) throw ParameterError("index out of range");
  double dn = n;
  switch (kind) {
    case WienerMomentKind::Sq:
      return k / dn;
    case WienerMomentKind::Quad:
      return 3.0 * k * k / (dn * dn);
    case WienerMomentKind::Cross:
      if (j < 1 || j >= k) throw ParameterError("cross moment needs j < k");
      return (static_cast<double>(k) * j + 2.0 * j * j) / (dn * dn);
  }
  throw ParameterError("unknown moment kind");
}

double law_weighted_mean(const Law& law, const RealFn& f) {
  struct V {
    const RealFn& f;
    double operator()(const DiracLaw& l) const { return f(l.c); }
    double operator()(const CauchyLaw&) const { return cauchy_weighted_mean(f); }
    double operator()(const GaussianLaw& l) const {
      return quad_gauss_weighted(f, l.mu, std::sqrt(l.var)).value;
    }
    double operator()(const UnknownLaw&) const {
      throw UnsupportedQuery("no law available for this functional");
      return 0.0;
    }
  };
  return std::visit(V{f}, law);
}

}  // namespace fmean
