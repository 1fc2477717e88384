#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fmean/errors.hpp"

namespace fmean {

// Uniform grid t_k = k/n, k = 1..n. step()*n == 1 at the representation
// level because step() is computed as 1.0/n on demand.
struct Grid {
  int n;

  explicit Grid(int n_) : n(n_) {
    if (n < 1) throw ParameterError("Grid resolution must be >= 1");
  }
  double step() const { return 1.0 / n; }
  double t(int k) const { return static_cast<double>(k) / n; }
};

// Counter-based deterministic stream. Same (seed, stream_index) gives an
// identical draw sequence; distinct stream indices are decorrelated by a
// 64-bit avalanche hash, so parallel and serial runs can be reconciled.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_index = 0);

  double uniform01();  // [0, 1)
  double gaussian(double mu, double sigma);
  double exponential(double lambda);
  double cauchy();

  static std::uint64_t avalanche(std::uint64_t x);

 private:
  std::uint64_t next();
  std::uint64_t state_;
};

struct QuadResult {
  double value = 0.0;
  double est_error = 0.0;
  long evaluations = 0;
};

inline constexpr double kQuadDefaultTol = 1e-10;
inline constexpr int kQuadMaxDepth = 60;

using RealFn = std::function<double(double)>;

// Adaptive Simpson refinement of \int_a^b f. Throws ConvergenceError
// (carrying the best estimate) when the refinement budget is exceeded.
QuadResult quad_adaptive(const RealFn& f, double a, double b,
                         double tol = kQuadDefaultTol);

// \int_0^inf g(x) lambda e^{-lambda x} dx via the substitution
// u = e^{-lambda x}, which maps the half line to (0, 1].
QuadResult quad_exp_weighted(const RealFn& g, double lambda,
                             double tol = kQuadDefaultTol);

// Gaussian-weighted expectation E[g(X)], X ~ N(mu, sigma^2), with the
// standardized domain truncated at +-8 (tail mass < 1e-14).
QuadResult quad_gauss_weighted(const RealFn& g, double mu, double sigma,
                               double tol = kQuadDefaultTol);

struct LoglogFit {
  double slope = 0.0;
  double intercept = 0.0;
};

// Least-squares line through (ln x_i, ln y_i). Needs >= 3 positive points.
LoglogFit fit_loglog(std::span<const double> xs, std::span<const double> ys);

}  // namespace fmean
