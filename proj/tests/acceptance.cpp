// Acceptance suite: one PASS/FAIL line per criterion. Criteria can be selected
// by id on the command line; the default runs all ten.

#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include "kerrqsd/validation.hpp"

int main(int argc, char** argv) {
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
  if (ids.empty()) {
    for (int i = 1; i <= kerrqsd::kCriterionCount; ++i) ids.push_back(i);
  }
  kerrqsd::ValidationOptions opts;
  if (const char* w = std::getenv("KERRQSD_WORKERS")) opts.workers = std::atoi(w);
  opts.log = [](const std::string& msg) { std::cerr << "  .. " << msg << std::endl; };

  int failed = 0;
  for (int id : ids) {
    const kerrqsd::CriterionResult r = kerrqsd::run_criterion(id, opts);
    std::cout << (r.passed ? "PASS" : "FAIL") << " criterion " << r.id << " (" << r.title << ") " << std::fixed
              << std::setprecision(1) << r.seconds << " s: " << r.detail << std::endl;
    failed += r.passed ? 0 : 1;
  }
  std::cout << (ids.size() - failed) << "/" << ids.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
