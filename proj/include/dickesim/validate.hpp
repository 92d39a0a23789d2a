#pragma once

#include <string>
#include <vector>

namespace dickesim::validate {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

std::vector<int> all_criteria();           ///< 1..11
std::vector<int> cross_solver_criteria();  ///< the suites the CLI `validate`
                                           ///< subcommand runs by default

CriterionResult run_criterion(int id);

/// "PASS C3: ..." / "FAIL C3: ..." line for terminal output.
std::string format_result(const CriterionResult& r);

}  // namespace dickesim::validate
