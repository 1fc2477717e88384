#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fmean/montecarlo.hpp"

namespace fmean {

struct EventBounds {
  double a, b;
};

struct ExperimentPlan {
  std::string id;
  SpaceModel space;
  FunctionalExpr functional;
  std::vector<int> n_list;
  long N = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> checks;  // mean, variance_decay, ks, exchange_gap,
                                    // divergence, cf, events
  std::optional<EventBounds> event;
};

struct ReportRow {
  std::string experiment_id;
  std::string space;
  std::string functional;
  int n = 0;  // 0 marks a cross-resolution summary row
  long N = 0;
  std::uint64_t seed = 0;
  std::optional<double> analytic_mean;
  std::optional<double> analytic_var;
  std::optional<double> mc_mean;
  std::optional<double> mc_var;
  std::optional<double> mc_stderr;
  std::optional<double> abs_error;
  std::optional<double> z_score;
  std::string status;  // OK, HEAVY_TAIL, DIVERGENT, UNSUPPORTED,
                       // NONCONCENTRATING, ILL_POSED
};

enum class ReportFormat { Csv, JsonLines };

std::vector<ExperimentPlan> parse_config(const std::string& path);
std::vector<ExperimentPlan> parse_config_text(const std::string& text);

std::vector<ReportRow> run_plan(const std::vector<ExperimentPlan>& plans,
                                int workers = 1);

std::string emit_report(const std::vector<ReportRow>& rows,
                        ReportFormat format);

// Parse a space description of the config form, e.g.
// {"kind":"ball2","R":2}; exposed for tests.
SpaceModel parse_space_json(const std::string& text);

std::vector<std::string> list_space_kinds();

}  // namespace fmean
