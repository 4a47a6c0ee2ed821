#pragma once

#include <string>
#include <vector>

#include "dpd/config.hpp"

namespace dpd {

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Executes the property suites on instances freshly generated from cfg:
// multiplier bounds, strong duality, the subderivative finite-difference
// identity, the penalty-function shape, the smallest-maximizer tie-break,
// fit interpolation, the epsilon decay of the estimated subgradients, the
// per-round trace invariants, and the vanishing of the relaxation slacks
// under a sufficiently large penalty. Results come back in that fixed order;
// a suite that throws is reported as failed with the message in detail.
// n_threads is forwarded to the algorithm runs the last two suites share.
std::vector<SuiteResult> run_validation_suites(const Config& cfg, int n_threads = 1);

}  // namespace dpd
