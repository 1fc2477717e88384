#include "fmean/numcore.hpp"

#include <cmath>
#include <numbers>

namespace fmean {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t RngStream::avalanche(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_index)
    : state_(avalanche(seed + kGolden * (stream_index + 1))) {}

std::uint64_t RngStream::next() {
  state_ += kGolden;
  return avalanche(state_);
}

double RngStream::uniform01() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double RngStream::gaussian(double mu, double sigma) {
  if (sigma <= 0.0) throw ParameterError("gaussian sigma must be > 0");
  // Box-Muller on a uniform pair; only the cosine leg is used so every
  // gaussian draw consumes exactly two uniforms.
  double u1 = uniform01();
  double u2 = uniform01();
  double r = std::sqrt(-2.0 * std::log1p(-u1));
  return mu + sigma * r * std::cos(2.0 * std::numbers::pi * u2);
}

double RngStream::exponential(double lambda) {
  if (lambda <= 0.0) throw ParameterError("exponential rate must be > 0");
  return -std::log1p(-uniform01()) / lambda;
}

double RngStream::cauchy() {
  return std::tan(std::numbers::pi * (uniform01() - 0.5));
}

namespace {

struct SimpsonState {
  const RealFn& f;
  double tol;
  long evals = 0;
  double partial = 0.0;  // best estimate accumulated so far
  double err = 0.0;

  double eval(double x) {
    ++evals;
    return f(x);
  }

  void refine(double a, double b, double fa, double fm, double fb,
              double whole, double tol_here, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m);
    double rm = 0.5 * (m + b);
    double flm = eval(lm);
    double frm = eval(rm);
    double h = b - a;
    double left = h / 12.0 * (fa + 4.0 * flm + fm);
    double right = h / 12.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (depth >= kQuadMaxDepth || evals > 4'000'000) {
      double best = partial + left + right + delta / 15.0;
      throw ConvergenceError("quadrature refinement budget exceeded", best);
    }
    if (std::abs(delta) <= 15.0 * tol_here) {
      partial += left + right + delta / 15.0;
      err += std::abs(delta) / 15.0;
      return;
    }
    refine(a, m, fa, flm, fm, left, 0.5 * tol_here, depth + 1);
    refine(m, b, fm, frm, fb, right, 0.5 * tol_here, depth + 1);
  }
};

}  // namespace

QuadResult quad_adaptive(const RealFn& f, double a, double b, double tol) {
  if (!(a <= b)) throw ParameterError("quad_adaptive requires a <= b");
  if (tol <= 0.0) throw ParameterError("quad_adaptive tolerance must be > 0");
  if (a == b) return {0.0, 0.0, 0};
  SimpsonState st{f, tol};
  double fa = st.eval(a);
  double m = 0.5 * (a + b);
  double fm = st.eval(m);
  double fb = st.eval(b);
  if (!std::isfinite(fa) || !std::isfinite(fm) || !std::isfinite(fb))
    throw ParameterError("quad_adaptive integrand not finite on [a,b]");
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  st.refine(a, b, fa, fm, fb, whole, tol, 0);
  return {st.partial, st.err, st.evals};
}

QuadResult quad_exp_weighted(const RealFn& g, double lambda, double tol) {
  if (lambda <= 0.0) throw ParameterError("exp weight rate must be > 0");
  // u = e^{-lambda x}:  \int_0^inf g(x) lambda e^{-lambda x} dx
  //                   = \int_0^1 g(-ln(u)/lambda) du.
  // The lower endpoint is clipped; for g of polynomial growth the
  // omitted mass is below 1e-13.
  const double u_min = 1e-16;
  auto h = [&](double u) { return g(-std::log(u) / lambda); };
  // dyadic panels toward u = 0 keep each adaptive pass shallow even when
  // g(-ln(u)/lambda) steepens near the endpoint
  QuadResult total{0.0, 0.0, 0};
  double hi = 1.0;
  while (hi > u_min) {
    double lo = std::max(u_min, 0.5 * hi);
    QuadResult r = quad_adaptive(h, lo, hi, tol * std::max(hi - lo, 1e-12));
    total.value += r.value;
    total.est_error += r.est_error;
    total.evaluations += r.evaluations;
    hi = lo;
  }
  return total;
}

QuadResult quad_gauss_weighted(const RealFn& g, double mu, double sigma,
                               double tol) {
  if (sigma <= 0.0) throw ParameterError("gauss weight sigma must be > 0");
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  auto h = [&](double z) {
    return norm * g(mu + sigma * z) * std::exp(-0.5 * z * z);
  };
  return quad_adaptive(h, -8.0, 8.0, tol);
}

LoglogFit fit_loglog(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 3)
    throw ParameterError("fit_loglog needs >= 3 paired points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] <= 0.0 || ys[i] <= 0.0)
      throw ParameterError("fit_loglog needs strictly positive data");
    double lx = std::log(xs[i]);
    double ly = std::log(ys[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw ParameterError("fit_loglog abscissae are degenerate");
  LoglogFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

}  // namespace fmean
