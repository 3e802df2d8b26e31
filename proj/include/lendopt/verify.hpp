#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace lendopt {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

/// The acceptance criteria, one result per criterion, each pinned to its
/// stated tolerance. `jobs` feeds inner sweeps and simulations.
std::vector<CheckResult> run_acceptance_suite(int jobs = 1);

/// The per-module invariant and property checks.
std::vector<CheckResult> run_invariant_suite(int jobs = 1);

void print_results(const std::vector<CheckResult>& results, std::ostream& out);
bool all_pass(const std::vector<CheckResult>& results);

}  // namespace lendopt
