#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "fmean/exprlang.hpp"
#include "fmean/numcore.hpp"

namespace fmean {

// --- space models ----------------------------------------------------------

struct GaussianDist {
  double mu, sigma;
};
struct CauchyDist {};
struct UniformDist {
  double a, b;
};
using IidDist = std::variant<GaussianDist, CauchyDist, UniformDist>;

struct BoundedUniform {
  double m1, m2;
};
struct IidDensity {
  IidDist dist;
};
struct LayerSimplex {};
struct DerivConstrained {};
struct Codim1 {
  ScalarFn a;  // weight, must be > 0 on [0,1]
  double s;    // constraint level, > 0
};
struct Codim2 {
  ScalarFn a, b;
  double r, s;
};
struct Ball2 {
  double R;
};
struct CauchySpace {};
struct WienerSpace {};

using SpaceModel =
    std::variant<BoundedUniform, IidDensity, LayerSimplex, DerivConstrained,
                 Codim1, Codim2, Ball2, CauchySpace, WienerSpace>;

std::string space_name(const SpaceModel& space);

// --- samples ---------------------------------------------------------------

// Values x_k at t_k = k/n; x0 is present for models that define a value at
// t = 0 (iid models draw it, Wiener pins it to 0).
struct PathSample {
  Eigen::VectorXd values;
  std::optional<double> x0;
};
struct LayerSample {
  Eigen::VectorXd weights;  // z_k >= 0, sum 1
};
struct DerivSample {
  Eigen::VectorXd deriv;  // z_k in [0,1]
  Eigen::VectorXd path;   // x_k = (1/n) sum_{j<=k} z_j, x0 = 0
};
using Sample = std::variant<PathSample, LayerSample, DerivSample>;

struct SampleStats {
  long rejections = 0;  // codim-2 resamples due to a negative eliminated coordinate
};

// --- coordinate densities --------------------------------------------------

struct UniformDensity {
  double a, b;
};
struct ExponentialDensity {
  double rate;
};
struct GaussianDensity {
  double mu, var;
};
struct CauchyDensity {};
struct DiracDensity {
  double c;
};
// Marginal of one coordinate of the uniform law on the n-ball of radius
// sqrt(n)R: pdf proportional to (1 - x^2/(nR^2))^{(n-1)/2} on |x| <= sqrt(n)R.
struct BallMarginal {
  int n;
  double R;
};
using Density = std::variant<UniformDensity, ExponentialDensity,
                             GaussianDensity, CauchyDensity, DiracDensity,
                             BallMarginal>;

double pdf(const Density& d, double x);
double cdf(const Density& d, double x);
double density_mean(const Density& d);  // DivergentMean for Cauchy
double sample_density(const Density& d, RngStream& rng);

// Limiting marginal law of x(t), plus the finite-n variance where the limit
// is degenerate but the finite-n law is not (derivative-constrained model).
struct CoordinateDensity {
  Density density;
  std::optional<double> finite_n_variance;
};

// --- operations ------------------------------------------------------------

Sample sample(const SpaceModel& space, int n, RngStream& rng,
              SampleStats* stats = nullptr);

CoordinateDensity coordinate_density(const SpaceModel& space, double t,
                                     std::optional<int> n = std::nullopt);

// Max absolute violation of the discretized defining constraints; 0 for
// unconstrained models.
double constraint_residual(const SpaceModel& space, const Sample& s);

struct WellPosedReport {
  bool ok = false;
  std::vector<std::string> diagnostics;
};

// Checks that the eliminated-coordinate hyperplane is sign-consistent (all
// reduced coefficients share the sign of the reduced right-hand side) and
// that the marginal rate is positive across a 1024-point grid of [0,1).
WellPosedReport well_posed(const Codim2& space);

// Reduced codim-2 data at resolution n: coefficients for k = 1..n-1 and the
// right-hand side of the single eliminated-form constraint.
struct Codim2Reduced {
  Eigen::VectorXd p;  // p_k = a_n b_k - a_k b_n
  double rhs;         // n(a_n s - b_n r), the algebraically consistent side
  Eigen::VectorXd a_k, b_k;
};
Codim2Reduced codim2_reduce(const Codim2& space, int n);

// Positive marginal rate of x(t): (a(t)b(1) - a(1)b(t)) / (b(1)r - a(1)s).
double codim2_rate(const Codim2& space, double t);

}  // namespace fmean
