#pragma once

#include <string>
#include <vector>

namespace fmean {

struct CriterionResult {
  int index = 0;
  std::string name;
  bool passed = true;
  std::vector<std::string> details;  // one line per sub-check
};

struct SelftestSummary {
  std::vector<CriterionResult> criteria;
  double elapsed_seconds = 0.0;

  bool all_passed() const {
    for (const auto& c : criteria)
      if (!c.passed) return false;
    return true;
  }
};

// Runs the full acceptance suite; quick mode shrinks every sample budget
// tenfold. The configured worker count only affects wall time, never values.
SelftestSummary run_selftest(bool quick, int workers);

// The demo experiment config bundled with the tool; the on-disk copy under
// configs/ has identical bytes.
const std::string& demo_config_text();

}  // namespace fmean
