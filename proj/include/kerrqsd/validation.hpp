#pragma once

// The acceptance suite: ten end-to-end checks against the analytic, master-equation
// and classical oracles. Shared by the acceptance test binary and `kerrqsd validate`.

#include <functional>
#include <string>
#include <vector>

namespace kerrqsd {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  /// Measured quantities next to their thresholds.
  std::string detail;
  double seconds = 0.0;
};

struct ValidationOptions {
  /// OpenMP threads for ensembles and seed loops; 0 uses the runtime default.
  int workers = 0;
  /// Progress lines; may be empty.
  std::function<void(const std::string&)> log;
};

constexpr int kCriterionCount = 10;

/// Runs criterion `id` in 1..10. Exceptions from the modules count as failures.
CriterionResult run_criterion(int id, const ValidationOptions& options = {});

std::vector<CriterionResult> run_validation(const std::vector<int>& ids, const ValidationOptions& options = {});

}  // namespace kerrqsd
