#pragma once

#include <string>
#include <vector>

namespace wpb {

struct SelfTestCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Metric-invariant and budget-accounting checks run by `wpb selftest`.
std::vector<SelfTestCheck> run_selftest();

}  // namespace wpb
