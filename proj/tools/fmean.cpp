#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "fmean/runner.hpp"
#include "fmean/selftest.hpp"

namespace {

int default_workers() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  return static_cast<int>(std::min(hw, 8u));
}

int cmd_run(const std::string& config_path, const std::string& out_path,
            const std::string& format, int workers,
            std::optional<std::uint64_t> seed_override) {
  std::vector<fmean::ExperimentPlan> plans;
  try {
    plans = fmean::parse_config(config_path);
  } catch (const fmean::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  if (seed_override)
    for (auto& plan : plans) plan.seed = *seed_override;
  std::vector<fmean::ReportRow> rows = fmean::run_plan(plans, workers);
  std::string report = fmean::emit_report(
      rows, format == "jsonl" ? fmean::ReportFormat::JsonLines
                              : fmean::ReportFormat::Csv);
  if (out_path.empty()) {
    std::cout << report;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
      std::cerr << "config error: cannot open output file " << out_path << "\n";
      return 2;
    }
    out << report;
  }
  for (const auto& row : rows)
    if (row.status != "OK" && row.status != "HEAVY_TAIL" &&
        row.status != "NONCONCENTRATING" && row.status != "DIVERGENT")
      return 1;
  return 0;
}

int cmd_selftest(bool quick, int workers) {
  fmean::SelftestSummary summary = fmean::run_selftest(quick, workers);
  for (const auto& crit : summary.criteria) {
    std::printf("criterion %2d %s - %s\n", crit.index,
                crit.passed ? "PASS" : "FAIL", crit.name.c_str());
    for (const auto& line : crit.details) std::printf("    %s\n", line.c_str());
  }
  int failed = 0;
  for (const auto& crit : summary.criteria)
    if (!crit.passed) ++failed;
  std::printf("selftest: %zu criteria, %d failed, %.1f s\n",
              summary.criteria.size(), failed, summary.elapsed_seconds);
  return summary.all_passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mean values of integral functionals on discretized function "
               "spaces: closed forms vs seeded Monte Carlo"};
  app.require_subcommand(1);

  std::string config_path, out_path, format = "csv";
  int workers = default_workers();
  std::optional<std::uint64_t> seed_override;

  CLI::App* run = app.add_subcommand("run", "execute an experiment config");
  run->add_option("config", config_path, "config file (JSON)")->required();
  run->add_option("--out", out_path, "output path (default: stdout)");
  run->add_option("--format", format, "csv or jsonl")
      ->check(CLI::IsMember({"csv", "jsonl"}));
  run->add_option("--workers", workers, "worker threads");
  run->add_option("--seed", seed_override, "override every plan seed");

  CLI::App* list = app.add_subcommand("list-spaces", "list space models");

  bool quick = false;
  CLI::App* selftest =
      app.add_subcommand("selftest", "run the acceptance suite");
  selftest->add_flag("--quick", quick, "shrink sample budgets tenfold");
  selftest->add_option("--workers", workers, "worker threads");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed())
    return cmd_run(config_path, out_path, format, workers, seed_override);
  if (list->parsed()) {
    for (const auto& line : fmean::list_space_kinds())
      std::cout << line << "\n";
    return 0;
  }
  return cmd_selftest(quick, workers);
}
