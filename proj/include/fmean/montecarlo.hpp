#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fmean/analytic.hpp"
#include "fmean/functionals.hpp"
#include "fmean/spaces.hpp"

namespace fmean {

struct EstimateReport {
  double mc_mean = 0.0;
  double mc_var = 0.0;  // unbiased, divisor N-1
  double stderr_ = 0.0;
  long N = 0;
  int n = 0;
  std::optional<double> analytic_mean;
  std::optional<double> analytic_var;
  std::optional<double> z_score;
  bool heavy_tailed = false;          // Cauchy-style values: z suppressed
  std::optional<double> median, iqr;  // filled for heavy-tailed reports
  long rejections = 0;
  std::string analytic_method;
};

struct Histogram {
  std::vector<double> edges;  // uniform width, size counts+1
  std::vector<long> counts;
  long N = 0;
};

// Analytic mean of a whole functional: single atoms go through the closed
// table, concentrating composites through the exchange formula, and
// single-child composites with a known functional law through quadrature
// against that law.
AnalyticResult functional_mean(const SpaceModel& space,
                               const FunctionalExpr& expr);

// One functional value per sample index; sample i always draws from the
// stream (seed, i), so any worker count yields identical values.
std::vector<double> collect_values(const SpaceModel& space,
                                   const FunctionalExpr& expr, int n, long N,
                                   std::uint64_t seed, int workers = 1,
                                   long* rejections = nullptr);

EstimateReport estimate(const SpaceModel& space, const FunctionalExpr& expr,
                        int n, long N, std::uint64_t seed, int workers = 1);

struct VarianceDecay {
  double slope = 0.0;
  std::vector<int> n_list;
  std::vector<double> variances;
  bool floored = false;  // a zero variance was floored at machine epsilon
};
VarianceDecay variance_decay(const SpaceModel& space,
                             const FunctionalExpr& expr,
                             std::span<const int> n_list, long N,
                             std::uint64_t seed, int workers = 1);

struct DivergenceScan {
  double exponent = 0.0;
  std::vector<int> n_list;
  std::vector<double> means;
  bool sign_flagged = false;  // fitted on |mean| because of negative means
  bool divergent = false;     // exponent > 0.5
};
DivergenceScan divergence_scan(const SpaceModel& space,
                               const FunctionalExpr& expr,
                               std::span<const int> n_list, long N,
                               std::uint64_t seed, int workers = 1);

double ks_statistic(std::vector<double> samples, const Density& density);

struct ExchangeGap {
  double gap = 0.0;      // |MC mean of h(Y) - h(EY)|
  double stderr_ = 0.0;  // of the MC mean
  double mc_mean = 0.0;
  double predicted = 0.0;  // h at the child means
};
ExchangeGap exchange_gap(const SpaceModel& space,
                         const FunctionalExpr& composite, int n, long N,
                         std::uint64_t seed, int workers = 1);

std::vector<std::complex<double>> empirical_cf(std::span<const double> samples,
                                               std::span<const double> t_grid);

Histogram histogram(std::span<const double> values, int bins = 0);

}  // namespace fmean
