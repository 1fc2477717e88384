#pragma once

#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <variant>

#include "fmean/functionals.hpp"
#include "fmean/spaces.hpp"

namespace fmean {

struct DiracLaw {
  double c;
};
struct CauchyLaw {};
struct GaussianLaw {
  double mu, var;
};
struct UnknownLaw {};
using Law = std::variant<DiracLaw, CauchyLaw, GaussianLaw, UnknownLaw>;

std::string law_str(const Law& law);

struct AnalyticResult {
  double mean = 0.0;
  std::optional<double> variance;  // absent when no finite variance exists
  Law law = UnknownLaw{};
  std::string method;  // which closed form produced the value
};

// Closed-form mean of a single atom on a space; the supported table is
// explicit and anything off it raises UnsupportedQuery.
AnalyticResult atom_mean(const SpaceModel& space, const Atom& atom);

// 0 for concentrating pairs, the known nonzero Wiener variances, nullopt
// where no finite variance exists.
std::optional<double> atom_variance(const SpaceModel& space, const Atom& atom);

Law functional_law(const SpaceModel& space, const Atom& atom);

// h evaluated at the child means; valid only on concentrating spaces with
// purely integral children.
AnalyticResult exchange_mean(const SpaceModel& space,
                             const FunctionalExpr& composite);

// Mixed pointwise/integral composites: integral atoms collapse to their
// means, the pointwise residual expectation is estimated by N draws from the
// coordinate marginals (treated as independent across points).
AnalyticResult partial_exchange(const SpaceModel& space,
                                const FunctionalExpr& composite, int n, int N,
                                RngStream& rng);

// (g(1/2) - (1/2) int_0^1 t g'(t/2) dt, int_0^1 g(t/2) dt): the stated form
// of the midslope mean and its integration-by-parts equivalent.
std::pair<double, double> deriv_mean_two_forms(const ScalarFn& g);

// ((e^{it/n}-1)/(it/n))^n for finite n; e^{it/2} when n is absent.
std::complex<double> charfn_uniform_mean(double t, std::optional<int> n);

// |e^{-|t|} - (e^{-|t/n|})^n|; analytically zero.
double cauchy_selfsim_residual(double t, int n);

// (arctan b - arctan a)/pi; accepts +-infinity.
double cauchy_interval_measure(double a, double b);

struct CodimConsistency {
  double r1 = 0.0;                // first-constraint residual
  std::optional<double> r2;      // second one, codim-2 only
  std::string method;
};
CodimConsistency codim_consistency(const SpaceModel& space);

// E(x_k^{2m}) on the ball: n^m R^{2m}(2m-1)!! / ((n+2)(n+4)...(n+2m)),
// or the n -> infinity limit (2m-1)!! R^{2m} when n is absent.
double ball_even_moment(std::optional<int> n, int m, double R);

enum class WienerMomentKind { Sq, Quad, Cross };
// Sq: E(x_k^2) = k/n; Quad: E(x_k^4) = 3k^2/n^2;
// Cross: E(x_k^2 x_j^2) = (kj + 2j^2)/n^2 for j < k.
double wiener_moment(WienerMomentKind kind, int k, int j, int n);

// E[f(Y)] for Y with the given law, by quadrature against its density.
// Cauchy integrands get a symmetric truncation that doubles until the tail
// contribution vanishes; non-integrable f raises DivergentMean.
double law_weighted_mean(const Law& law, const RealFn& f);

}  // namespace fmean
