#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace smolu::tools {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

constexpr int kCriteria = 13;

// Runs the listed criteria (all when empty) in order, sharing the expensive
// solves between them. Each result line is written to `log` as it finishes.
std::vector<CriterionResult> run_acceptance(const std::vector<int>& only, std::ostream& log);

std::string format_result(const CriterionResult& r);

}  // namespace smolu::tools
