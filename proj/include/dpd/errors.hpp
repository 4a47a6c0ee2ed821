#pragma once

#include <stdexcept>

namespace dpd {

// Invalid configuration or parameter ranges. The CLI maps this to exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Instance or graph generation could not produce a usable object (connectivity
// retries exhausted, infeasible right-hand side). CLI exit code 2.
struct GenerationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Solver breakdown: pivot caps, bisection nonconvergence, failed validation
// suites. CLI exit code 3.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace dpd
