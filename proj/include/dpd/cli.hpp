#pragma once

#include <string>

#include "dpd/config.hpp"

namespace dpd {

// Subcommand bodies behind the executable. Domain failures propagate as the
// usual exceptions (ConfigError, GenerationError, NumericalError); the entry
// point maps them onto the exit-code contract 0/1/2/3.

// Generates the instance and graph, runs the algorithm, writes the trace CSV
// to out_path, and prints a one-line summary (final cost error and elapsed
// seconds) to standard output. Returns 0.
int cmd_run(const Config& cfg, const std::string& out_path, int n_threads);

// Prints the centralized reference: f_star, lambda_star, the resolved
// penalty M, and the feasibility margin. When the instance's total dimension
// is at most 4 it also prints the exhaustive grid cross-check and the gap
// between the two optima. Returns 0.
int cmd_reference(const Config& cfg);

// Runs the validation suites and prints one PASS/FAIL line each. Returns 0
// when every suite passes and 3 otherwise.
int cmd_validate(const Config& cfg, int n_threads);

}  // namespace dpd
