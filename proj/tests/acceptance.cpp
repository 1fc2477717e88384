// Runs the full acceptance suite and prints one pass/fail line per
// criterion, with sub-check detail indented underneath.
#include <cstdio>

#include "fmean/selftest.hpp"

int main() {
  fmean::SelftestSummary summary = fmean::run_selftest(false, 8);
  for (const auto& crit : summary.criteria) {
    std::printf("criterion %2d %s - %s\n", crit.index,
                crit.passed ? "PASS" : "FAIL", crit.name.c_str());
    for (const auto& line : crit.details) std::printf("    %s\n", line.c_str());
  }
  int failed = 0;
  for (const auto& crit : summary.criteria)
    if (!crit.passed) ++failed;
  std::printf("acceptance: %zu criteria, %d failed, %.1f s\n",
              summary.criteria.size(), failed, summary.elapsed_seconds);
  return failed == 0 ? 0 : 1;
}
