#include "fmean/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

namespace fmean {

namespace {

bool cauchy_like(const SpaceModel& space) {
  if (std::holds_alternative<CauchySpace>(space)) return true;
  if (const auto* iid = std::get_if<IidDensity>(&space))
    return std::holds_alternative<CauchyDist>(iid->dist);
  return false;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  double pos = q * (sorted.size() - 1);
  std::size_t lo = static_cast<std::size_t>(pos);
  std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  double frac = pos - lo;
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

AnalyticResult functional_mean(const SpaceModel& space,
                               const FunctionalExpr& expr) {
  if (expr.atoms.empty()) throw ParameterError("functional has no atoms");
  if (!expr.h && expr.atoms.size() == 1)
    return atom_mean(space, expr.atoms[0]);
  bool nonconc = std::holds_alternative<CauchySpace>(space) ||
                 std::holds_alternative<WienerSpace>(space);
  if (!nonconc) return exchange_mean(space, expr);
  // non-concentrating spaces: a single child with a known law still gives a
  // quadrature value for E h(Y)
  if (expr.atoms.size() == 1 && expr.h) {
    Law law = functional_law(space, expr.atoms[0]);
    if (!std::holds_alternative<UnknownLaw>(law)) {
      const MultiFn& h = *expr.h;
      RealFn f = [&h](double y) {
        double arg[1] = {y};
        return h(std::span<const double>(arg, 1));
      };
      double m = law_weighted_mean(law, f);
      std::optional<double> var;
      try {
        double m2 = law_weighted_mean(
            law, [&f](double y) { double v = f(y); return v * v; });
        var = std::max(0.0, m2 - m * m);
      } catch (const DivergentMean&) {
      }
      return {m, var, law, "law-quadrature"};
    }
  }
  throw NonConcentrating(
      "no law is available for this functional on a non-concentrating space");
}

std::vector<double> collect_values(const SpaceModel& space,
                                   const FunctionalExpr& expr, int n, long N,
                                   std::uint64_t seed, int workers,
                                   long* rejections) {
  if (N < 1) throw ParameterError("sample count must be >= 1");
  if (workers < 1) workers = 1;
  Grid grid(n);
  std::vector<double> values(static_cast<std::size_t>(N));
  std::atomic<long> rej{0};
  std::exception_ptr first_error;
  std::mutex err_mutex;

  auto run_range = [&](long lo, long hi) {
    SampleStats stats;
    try {
      for (long i = lo; i < hi; ++i) {
        RngStream rng(seed, static_cast<std::uint64_t>(i));
        Sample s = sample(space, n, rng, &stats);
        values[static_cast<std::size_t>(i)] = eval_functional(expr, s, grid);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(err_mutex);
      if (!first_error) first_error = std::current_exception();
    }
    rej += stats.rejections;
  };

  if (workers == 1 || N < 2 * workers) {
    run_range(0, N);
  } else {
    std::vector<std::thread> pool;
    long chunk = (N + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      long lo = w * chunk;
      long hi = std::min(N, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(run_range, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  if (rejections) *rejections = rej.load();
  return values;
}

EstimateReport estimate(const SpaceModel& space, const FunctionalExpr& expr,
                        int n, long N, std::uint64_t seed, int workers) {
  if (N < 2) throw ParameterError("estimation needs N >= 2");
  EstimateReport rep;
  rep.N = N;
  rep.n = n;
  std::vector<double> values =
      collect_values(space, expr, n, N, seed, workers, &rep.rejections);
  // index-ordered reduction: identical bytes for any worker count
  double sum = 0.0;
  for (double v : values) sum += v;
  rep.mc_mean = sum / N;
  double ss = 0.0;
  for (double v : values) {
    double d = v - rep.mc_mean;
    ss += d * d;
  }
  rep.mc_var = ss / (N - 1);
  rep.stderr_ = std::sqrt(rep.mc_var / N);
  try {
    AnalyticResult ar = functional_mean(space, expr);
    rep.analytic_mean = ar.mean;
    rep.analytic_var = ar.variance;
    rep.analytic_method = ar.method;
  } catch (const Error&) {
  }
  rep.heavy_tailed = cauchy_like(space) && !rep.analytic_var.has_value();
  if (rep.heavy_tailed) {
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    rep.median = quantile_sorted(sorted, 0.5);
    rep.iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  } else if (rep.analytic_mean && rep.stderr_ > 0.0) {
    rep.z_score = (rep.mc_mean - *rep.analytic_mean) / rep.stderr_;
  }
  return rep;
}

VarianceDecay variance_decay(const SpaceModel& space,
                             const FunctionalExpr& expr,
                             std::span<const int> n_list, long N,
                             std::uint64_t seed, int workers) {
  if (n_list.size() < 3)
    throw ParameterError("variance decay needs >= 3 resolutions");
  VarianceDecay out;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (i > 0 && n_list[i] <= n_list[i - 1])
      throw ParameterError("resolutions must be increasing");
    EstimateReport rep = estimate(space, expr, n_list[i], N, seed, workers);
    double var = rep.mc_var;
    if (var <= 0.0) {
      var = std::numeric_limits<double>::epsilon();
      out.floored = true;
    }
    out.n_list.push_back(n_list[i]);
    out.variances.push_back(var);
    xs.push_back(n_list[i]);
    ys.push_back(var);
  }
  out.slope = fit_loglog(xs, ys).slope;
  return out;
}

DivergenceScan divergence_scan(const SpaceModel& space,
                               const FunctionalExpr& expr,
                               std::span<const int> n_list, long N,
                               std::uint64_t seed, int workers) {
  if (n_list.size() < 3)
    throw ParameterError("divergence scan needs >= 3 resolutions");
  DivergenceScan out;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (i > 0 && n_list[i] <= n_list[i - 1])
      throw ParameterError("resolutions must be increasing");
    EstimateReport rep = estimate(space, expr, n_list[i], N, seed, workers);
    double mean = rep.mc_mean;
    if (mean < 0.0) out.sign_flagged = true;
    out.n_list.push_back(n_list[i]);
    out.means.push_back(mean);
    xs.push_back(n_list[i]);
    ys.push_back(std::max(std::abs(mean),
                          std::numeric_limits<double>::epsilon()));
  }
  out.exponent = fit_loglog(xs, ys).slope;
  out.divergent = out.exponent > 0.5;
  return out;
}

double ks_statistic(std::vector<double> samples, const Density& density) {
  if (samples.size() < 100)
    throw ParameterError("distribution comparison needs >= 100 samples");
  std::sort(samples.begin(), samples.end());
  const double N = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double c = cdf(density, samples[i]);
    d = std::max(d, std::abs(c - static_cast<double>(i) / N));
    d = std::max(d, std::abs(c - static_cast<double>(i + 1) / N));
  }
  return d;
}

ExchangeGap exchange_gap(const SpaceModel& space,
                         const FunctionalExpr& composite, int n, long N,
                         std::uint64_t seed, int workers) {
  if (classify(composite) != FunctionalClass::PurelyIntegral)
    throw UnsupportedQuery("the gap is defined for purely integral composites");
  std::vector<double> means(composite.atoms.size());
  for (std::size_t i = 0; i < composite.atoms.size(); ++i)
    means[i] = atom_mean(space, composite.atoms[i]).mean;
  double predicted = composite.h ? (*composite.h)(means) : means[0];
  EstimateReport rep = estimate(space, composite, n, N, seed, workers);
  ExchangeGap out;
  out.predicted = predicted;
  out.mc_mean = rep.mc_mean;
  out.stderr_ = rep.stderr_;
  out.gap = std::abs(rep.mc_mean - predicted);
  return out;
}

std::vector<std::complex<double>> empirical_cf(std::span<const double> samples,
                                               std::span<const double> t_grid) {
  if (samples.size() < 100)
    throw ParameterError("characteristic functions need >= 100 samples");
  std::vector<std::complex<double>> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    std::complex<double> acc{0.0, 0.0};
    for (double y : samples)
      acc += std::complex<double>(std::cos(t * y), std::sin(t * y));
    out.push_back(acc / static_cast<double>(samples.size()));
  }
  return out;
}

Histogram histogram(std::span<const double> values, int bins) {
  if (values.empty()) throw ParameterError("histogram needs data");
  if (bins <= 0)
    bins = std::min<int>(
        512, static_cast<int>(std::ceil(std::sqrt(
                 static_cast<double>(values.size())))));
  double lo = *std::min_element(values.begin(), values.end());
  double hi = *std::max_element(values.begin(), values.end());
  if (lo == hi) hi = lo + 1.0;
  Histogram h;
  h.N = static_cast<long>(values.size());
  h.counts.assign(bins, 0);
  h.edges.resize(bins + 1);
  double width = (hi - lo) / bins;
  for (int b = 0; b <= bins; ++b) h.edges[b] = lo + b * width;
  for (double v : values) {
    int b = static_cast<int>((v - lo) / width);
    if (b >= bins) b = bins - 1;
    if (b < 0) b = 0;
    ++h.counts[b];
  }
  return h;
}

}  // namespace fmean
