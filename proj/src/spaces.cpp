#include "fmean/spaces.hpp"

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

constexpr double kSqrt2 = std::numbers::sqrt2;

double gaussian_cdf(double x, double mu, double sigma) {
  return 0.5 * std::erfc(-(x - mu) / (sigma * kSqrt2));
}

double ball_support(const BallMarginal& b) { return std::sqrt(b.n) * b.R; }

double ball_log_norm(const BallMarginal& b) {
  // pdf = exp(log_norm) * (1 - x^2/(nR^2))^{(n-1)/2}
  return std::lgamma(1.0 + b.n / 2.0) - std::lgamma((b.n + 1) / 2.0) -
         0.5 * std::log(std::numbers::pi) - std::log(ball_support(b));
}

}  // namespace

std::string space_name(const SpaceModel& space) {
  struct V {
    std::string operator()(const BoundedUniform& m) const {
      return "bounded_uniform(" + fmt(m.m1) + "," + fmt(m.m2) + ")";
    }
    std::string operator()(const IidDensity& m) const {
      struct D {
        std::string operator()(const GaussianDist& d) const {
          return "gaussian(" + fmt(d.mu) + "," + fmt(d.sigma) + ")";
        }
        std::string operator()(const CauchyDist&) const { return "cauchy"; }
        std::string operator()(const UniformDist& d) const {
          return "uniform(" + fmt(d.a) + "," + fmt(d.b) + ")";
        }
      };
      return "iid[" + std::visit(D{}, m.dist) + "]";
    }
    std::string operator()(const LayerSimplex&) const { return "layer_simplex"; }
    std::string operator()(const DerivConstrained&) const {
      return "deriv_constrained";
    }
    std::string operator()(const Codim1& m) const {
      return "codim1(a=" + m.a.str() + ";s=" + fmt(m.s) + ")";
    }
    std::string operator()(const Codim2& m) const {
      return "codim2(a=" + m.a.str() + ";b=" + m.b.str() + ";r=" + fmt(m.r) +
             ";s=" + fmt(m.s) + ")";
    }
    std::string operator()(const Ball2& m) const {
      return "ball2(R=" + fmt(m.R) + ")";
    }
    std::string operator()(const CauchySpace&) const { return "cauchy_space"; }
    std::string operator()(const WienerSpace&) const { return "wiener_space"; }
  };
  return std::visit(V{}, space);
}

// --- densities -------------------------------------------------------------

double pdf(const Density& d, double x) {
  struct V {
    double x;
    double operator()(const UniformDensity& u) const {
      if (u.b <= u.a) throw ParameterError("uniform density needs a < b");
      return (x >= u.a && x <= u.b) ? 1.0 / (u.b - u.a) : 0.0;
    }
    double operator()(const ExponentialDensity& e) const {
      if (e.rate <= 0.0) throw ParameterError("exponential rate must be > 0");
      return x < 0.0 ? 0.0 : e.rate * std::exp(-e.rate * x);
    }
    double operator()(const GaussianDensity& g) const {
      if (g.var <= 0.0) throw ParameterError("gaussian variance must be > 0");
      double z = (x - g.mu);
      return std::exp(-0.5 * z * z / g.var) /
             std::sqrt(2.0 * std::numbers::pi * g.var);
    }
    double operator()(const CauchyDensity&) const {
      return 1.0 / (std::numbers::pi * (1.0 + x * x));
    }
    double operator()(const DiracDensity& dd) const {
      return x == dd.c ? std::numeric_limits<double>::infinity() : 0.0;
    }
    double operator()(const BallMarginal& b) const {
      double sup = ball_support(b);
      if (std::abs(x) >= sup) return 0.0;
      double u = 1.0 - (x * x) / (sup * sup);
      return std::exp(ball_log_norm(b) + 0.5 * (b.n - 1) * std::log(u));
    }
  };
  return std::visit(V{x}, d);
}

double cdf(const Density& d, double x) {
  struct V {
    double x;
    double operator()(const UniformDensity& u) const {
      if (x <= u.a) return 0.0;
      if (x >= u.b) return 1.0;
      return (x - u.a) / (u.b - u.a);
    }
    double operator()(const ExponentialDensity& e) const {
      return x < 0.0 ? 0.0 : -std::expm1(-e.rate * x);
    }
    double operator()(const GaussianDensity& g) const {
      return gaussian_cdf(x, g.mu, std::sqrt(g.var));
    }
    double operator()(const CauchyDensity&) const {
      return 0.5 + std::atan(x) / std::numbers::pi;
    }
    double operator()(const DiracDensity& dd) const {
      return x >= dd.c ? 1.0 : 0.0;
    }
    double operator()(const BallMarginal& b) const {
      double sup = ball_support(b);
      if (x <= -sup) return 0.0;
      if (x >= sup) return 1.0;
      Density self = b;
      // symmetric density: integrate the shorter side
      if (x <= 0.0) {
        QuadResult q = quad_adaptive(
            [&](double y) { return pdf(self, y); }, -sup, x, 1e-12);
        return q.value;
      }
      QuadResult q = quad_adaptive(
          [&](double y) { return pdf(self, y); }, x, sup, 1e-12);
      return 1.0 - q.value;
    }
  };
  return std::visit(V{x}, d);
}

double density_mean(const Density& d) {
  struct V {
    double operator()(const UniformDensity& u) const { return 0.5 * (u.a + u.b); }
    double operator()(const ExponentialDensity& e) const { return 1.0 / e.rate; }
    double operator()(const GaussianDensity& g) const { return g.mu; }
    double operator()(const CauchyDensity&) const {
      throw DivergentMean("the Cauchy law has no mean");
    }
    double operator()(const DiracDensity& dd) const { return dd.c; }
    double operator()(const BallMarginal&) const { return 0.0; }
  };
  return std::visit(V{}, d);
}

double sample_density(const Density& d, RngStream& rng) {
  struct V {
    RngStream& rng;
    double operator()(const UniformDensity& u) const {
      return u.a + (u.b - u.a) * rng.uniform01();
    }
    double operator()(const ExponentialDensity& e) const {
      return rng.exponential(e.rate);
    }
    double operator()(const GaussianDensity& g) const {
      return rng.gaussian(g.mu, std::sqrt(g.var));
    }
    double operator()(const CauchyDensity&) const { return rng.cauchy(); }
    double operator()(const DiracDensity& dd) const { return dd.c; }
    double operator()(const BallMarginal&) const {
      throw UnsupportedQuery("no direct sampler for the finite-n ball marginal");
      return 0.0;
    }
  };
  return std::visit(V{rng}, d);
}

// --- codim-2 reduction -----------------------------------------------------

Codim2Reduced codim2_reduce(const Codim2& space, int n) {
  if (n < 3) throw ParameterError("codim-2 model needs n >= 3");
  Codim2Reduced red;
  red.a_k.resize(n);
  red.b_k.resize(n);
  for (int k = 1; k <= n; ++k) {
    double t = static_cast<double>(k) / n;
    red.a_k[k - 1] = space.a(t);
    red.b_k[k - 1] = space.b(t);
  }
  double an = red.a_k[n - 1];
  double bn = red.b_k[n - 1];
  red.p.resize(n - 1);
  for (int k = 1; k < n; ++k)
    red.p[k - 1] = an * red.b_k[k - 1] - red.a_k[k - 1] * bn;
  // Eliminating x_n from {sum a_k x_k = nr, sum b_k x_k = ns} leaves
  // sum p_k x_k equal to this side; the source formula carries the
  // opposite sign, which cannot satisfy its own constraints.
  red.rhs = n * (an * space.s - bn * space.r);
  return red;
}

double codim2_rate(const Codim2& space, double t) {
  double a1 = space.a(1.0), b1 = space.b(1.0);
  double denom = b1 * space.r - a1 * space.s;
  if (denom == 0.0)
    throw IllPosedConstraint("codim-2 marginal rate denominator vanishes");
  return (space.a(t) * b1 - a1 * space.b(t)) / denom;
}

WellPosedReport well_posed(const Codim2& space) {
  WellPosedReport rep;
  rep.ok = true;
  const int n = 1024;
  Codim2Reduced red;
  try {
    red = codim2_reduce(space, n);
  } catch (const Error& e) {
    rep.ok = false;
    rep.diagnostics.push_back(e.what());
    return rep;
  }
  double pmax = red.p.cwiseAbs().maxCoeff();
  if (pmax == 0.0) {
    rep.ok = false;
    rep.diagnostics.push_back("degenerate: all reduced coefficients vanish");
    return rep;
  }
  if (red.rhs == 0.0) {
    rep.ok = false;
    rep.diagnostics.push_back("zero reduced right-hand side");
    return rep;
  }
  double sgn = red.rhs > 0.0 ? 1.0 : -1.0;
  for (int k = 0; k < red.p.size(); ++k) {
    if (red.p[k] * sgn <= 0.0) {
      rep.ok = false;
      rep.diagnostics.push_back("coefficient sign mismatch at k=" +
                                std::to_string(k + 1));
      break;
    }
  }
  for (int j = 0; j < 1024; ++j) {
    double t = static_cast<double>(j) / 1024.0;
    double rate;
    try {
      rate = codim2_rate(space, t);
    } catch (const Error& e) {
      rep.ok = false;
      rep.diagnostics.push_back(e.what());
      break;
    }
    if (rate <= 0.0) {
      rep.ok = false;
      rep.diagnostics.push_back("non-positive marginal rate at t=" + fmt(t));
      break;
    }
  }
  return rep;
}

// --- sampling --------------------------------------------------------------

namespace {

double draw_iid(const IidDist& dist, RngStream& rng) {
  struct V {
    RngStream& rng;
    double operator()(const GaussianDist& d) const {
      return rng.gaussian(d.mu, d.sigma);
    }
    double operator()(const CauchyDist&) const { return rng.cauchy(); }
    double operator()(const UniformDist& d) const {
      if (d.b <= d.a) throw ParameterError("uniform bounds need a < b");
      return d.a + (d.b - d.a) * rng.uniform01();
    }
  };
  return std::visit(V{rng}, dist);
}

// iid Exp(1) normalized to a given total: uniform on the scaled simplex.
Eigen::VectorXd simplex_scaled(int m, double total, RngStream& rng) {
  Eigen::VectorXd e(m);
  double sum = 0.0;
  for (int i = 0; i < m; ++i) {
    e[i] = rng.exponential(1.0);
    sum += e[i];
  }
  return e * (total / sum);
}

}  // namespace

Sample sample(const SpaceModel& space, int n, RngStream& rng,
              SampleStats* stats) {
  if (n < 2) throw ParameterError("sampling needs n >= 2");
  struct V {
    int n;
    RngStream& rng;
    SampleStats* stats;

    Sample operator()(const BoundedUniform& m) const {
      if (m.m2 <= m.m1) throw ParameterError("bounded uniform needs m1 < m2");
      PathSample p;
      p.x0 = m.m1 + (m.m2 - m.m1) * rng.uniform01();
      p.values.resize(n);
      for (int k = 0; k < n; ++k)
        p.values[k] = m.m1 + (m.m2 - m.m1) * rng.uniform01();
      return p;
    }
    Sample operator()(const IidDensity& m) const {
      PathSample p;
      p.x0 = draw_iid(m.dist, rng);
      p.values.resize(n);
      for (int k = 0; k < n; ++k) p.values[k] = draw_iid(m.dist, rng);
      return p;
    }
    Sample operator()(const LayerSimplex&) const {
      LayerSample s;
      s.weights = simplex_scaled(n, 1.0, rng);
      return s;
    }
    Sample operator()(const DerivConstrained&) const {
      DerivSample s;
      s.deriv.resize(n);
      s.path.resize(n);
      double acc = 0.0;
      for (int k = 0; k < n; ++k) {
        s.deriv[k] = rng.uniform01();
        acc += s.deriv[k];
        s.path[k] = acc / n;
      }
      return s;
    }
    Sample operator()(const Codim1& m) const {
      if (m.s <= 0.0) throw ParameterError("codim-1 level s must be > 0");
      Eigen::VectorXd u = simplex_scaled(n, static_cast<double>(n) * m.s, rng);
      PathSample p;
      p.values.resize(n);
      for (int k = 1; k <= n; ++k) {
        double a = m.a(static_cast<double>(k) / n);
        if (a <= 0.0)
          throw ParameterError("codim-1 weight a(t) must be > 0 on (0,1]");
        p.values[k - 1] = u[k - 1] / a;
      }
      return p;
    }
    Sample operator()(const Codim2& m) const {
      Codim2Reduced red = codim2_reduce(m, n);
      if (red.rhs == 0.0)
        throw IllPosedConstraint("zero reduced right-hand side");
      double sgn = red.rhs > 0.0 ? 1.0 : -1.0;
      for (int k = 0; k < red.p.size(); ++k)
        if (red.p[k] * sgn <= 0.0)
          throw IllPosedConstraint(
              "reduced coefficient sign mismatch at k=" + std::to_string(k + 1));
      double an = red.a_k[n - 1];
      const long kMaxTries = 100000;
      for (long tries = 0; tries < kMaxTries; ++tries) {
        Eigen::VectorXd v = simplex_scaled(n - 1, std::abs(red.rhs), rng);
        PathSample p;
        p.values.resize(n);
        double partial = 0.0;
        for (int k = 0; k < n - 1; ++k) {
          p.values[k] = sgn * v[k] / red.p[k];
          partial += red.a_k[k] * p.values[k];
        }
        double xn = (n * m.r - partial) / an;
        if (xn >= 0.0) {
          p.values[n - 1] = xn;
          return p;
        }
        if (stats) ++stats->rejections;
      }
      throw IllPosedConstraint(
          "codim-2 rejection cap hit: eliminated coordinate stays negative");
    }
    Sample operator()(const Ball2& m) const {
      if (m.R <= 0.0) throw ParameterError("ball radius must be > 0");
      Eigen::VectorXd g(n);
      for (int k = 0; k < n; ++k) g[k] = rng.gaussian(0.0, 1.0);
      double norm = g.norm();
      double radius = std::sqrt(static_cast<double>(n)) * m.R *
                      std::pow(rng.uniform01(), 1.0 / n);
      PathSample p;
      p.values = g * (radius / norm);
      return p;
    }
    Sample operator()(const CauchySpace&) const {
      PathSample p;
      p.x0 = rng.cauchy();
      p.values.resize(n);
      for (int k = 0; k < n; ++k) p.values[k] = rng.cauchy();
      return p;
    }
    Sample operator()(const WienerSpace&) const {
      PathSample p;
      p.x0 = 0.0;
      p.values.resize(n);
      double acc = 0.0;
      double sigma = 1.0 / std::sqrt(static_cast<double>(n));
      for (int k = 0; k < n; ++k) {
        acc += rng.gaussian(0.0, sigma);
        p.values[k] = acc;
      }
      return p;
    }
  };
  return std::visit(V{n, rng, stats}, space);
}

// --- coordinate densities --------------------------------------------------

CoordinateDensity coordinate_density(const SpaceModel& space, double t,
                                     std::optional<int> n) {
  if (!(t > 0.0 && t <= 1.0))
    throw ParameterError("coordinate densities are defined for t in (0,1]");
  struct V {
    double t;
    std::optional<int> n;
    CoordinateDensity operator()(const BoundedUniform& m) const {
      return {UniformDensity{m.m1, m.m2}, std::nullopt};
    }
    CoordinateDensity operator()(const IidDensity& m) const {
      struct D {
        Density operator()(const GaussianDist& d) const {
          return GaussianDensity{d.mu, d.sigma * d.sigma};
        }
        Density operator()(const CauchyDist&) const { return CauchyDensity{}; }
        Density operator()(const UniformDist& d) const {
          return UniformDensity{d.a, d.b};
        }
      };
      return {std::visit(D{}, m.dist), std::nullopt};
    }
    CoordinateDensity operator()(const LayerSimplex&) const {
      throw UnsupportedQuery(
          "layer weights carry no pointwise value at a fixed t");
    }
    CoordinateDensity operator()(const DerivConstrained&) const {
      CoordinateDensity cd{DiracDensity{t / 2.0}, std::nullopt};
      if (n) cd.finite_n_variance = t / (12.0 * *n);
      return cd;
    }
    CoordinateDensity operator()(const Codim1& m) const {
      double a = m.a(t);
      if (a <= 0.0)
        throw ParameterError("codim-1 weight a(t) must be > 0 on (0,1]");
      return {ExponentialDensity{a / m.s}, std::nullopt};
    }
    CoordinateDensity operator()(const Codim2& m) const {
      double rate = codim2_rate(m, t);
      if (rate <= 0.0)
        throw IllPosedConstraint("non-positive codim-2 marginal rate at t=" +
                                 fmt(t));
      return {ExponentialDensity{rate}, std::nullopt};
    }
    CoordinateDensity operator()(const Ball2& m) const {
      if (n) return {BallMarginal{*n, m.R}, std::nullopt};
      return {GaussianDensity{0.0, m.R * m.R}, std::nullopt};
    }
    CoordinateDensity operator()(const CauchySpace&) const {
      return {CauchyDensity{}, std::nullopt};
    }
    CoordinateDensity operator()(const WienerSpace&) const {
      return {GaussianDensity{0.0, t}, std::nullopt};
    }
  };
  return std::visit(V{t, n}, space);
}

// --- constraint residuals --------------------------------------------------

double constraint_residual(const SpaceModel& space, const Sample& s) {
  const auto* path = std::get_if<PathSample>(&s);
  const auto* layer = std::get_if<LayerSample>(&s);
  const auto* deriv = std::get_if<DerivSample>(&s);
  struct V {
    const PathSample* path;
    const LayerSample* layer;
    const DerivSample* deriv;

    const PathSample& need_path() const {
      if (!path) throw ParameterError("sample kind mismatch: expected a path");
      return *path;
    }

    double operator()(const BoundedUniform&) const {
      need_path();
      return 0.0;
    }
    double operator()(const IidDensity&) const {
      need_path();
      return 0.0;
    }
    double operator()(const LayerSimplex&) const {
      if (!layer)
        throw ParameterError("sample kind mismatch: expected layer weights");
      double r = std::abs(layer->weights.sum() - 1.0);
      double neg = std::max(0.0, -layer->weights.minCoeff());
      return std::max(r, neg);
    }
    double operator()(const DerivConstrained&) const {
      if (!deriv)
        throw ParameterError("sample kind mismatch: expected a derivative sample");
      double worst = 0.0;
      int n = static_cast<int>(deriv->deriv.size());
      double acc = 0.0;
      for (int k = 0; k < n; ++k) {
        worst = std::max(worst, std::max(-deriv->deriv[k], deriv->deriv[k] - 1.0));
        acc += deriv->deriv[k];
        worst = std::max(worst, std::abs(deriv->path[k] - acc / n));
      }
      return std::max(worst, 0.0);
    }
    double operator()(const Codim1& m) const {
      const PathSample& p = need_path();
      int n = static_cast<int>(p.values.size());
      double sum = 0.0;
      for (int k = 1; k <= n; ++k)
        sum += m.a(static_cast<double>(k) / n) * p.values[k - 1];
      return std::abs(sum / n - m.s);
    }
    double operator()(const Codim2& m) const {
      const PathSample& p = need_path();
      int n = static_cast<int>(p.values.size());
      double sa = 0.0, sb = 0.0;
      for (int k = 1; k <= n; ++k) {
        double t = static_cast<double>(k) / n;
        sa += m.a(t) * p.values[k - 1];
        sb += m.b(t) * p.values[k - 1];
      }
      return std::max(std::abs(sa / n - m.r), std::abs(sb / n - m.s));
    }
    double operator()(const Ball2& m) const {
      const PathSample& p = need_path();
      int n = static_cast<int>(p.values.size());
      double q = p.values.squaredNorm() / n;
      return std::max(0.0, q - m.R * m.R);
    }
    double operator()(const CauchySpace&) const {
      need_path();
      return 0.0;
    }
    double operator()(const WienerSpace&) const {
      need_path();
      return 0.0;
    }
  };
  return std::visit(V{path, layer, deriv}, space);
}

}  // namespace fmean
