// Acceptance suite: one pass/fail line per criterion. With arguments, runs
// only the listed criterion numbers (used by ctest to report them
// individually).

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <vector>

#include "dickesim/validate.hpp"

int main(int argc, char** argv) {
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
  if (ids.empty()) ids = dickesim::validate::all_criteria();

  bool all_pass = true;
  for (const int id : ids) {
    dickesim::validate::CriterionResult result;
    try {
      result = dickesim::validate::run_criterion(id);
    } catch (const std::exception& e) {
      result.id = id;
      result.name = "criterion crashed";
      result.pass = false;
      result.detail = e.what();
    }
    std::puts(dickesim::validate::format_result(result).c_str());
    std::fflush(stdout);
    all_pass = all_pass && result.pass;
  }
  return all_pass ? 0 : 1;
}
