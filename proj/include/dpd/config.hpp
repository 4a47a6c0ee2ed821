#pragma once

#include <string>

#include "dpd/problem.hpp"
#include "dpd/runtime.hpp"

namespace dpd {

// One experiment description: instance generation knobs, graph density, the
// run settings, and the output path. The penalty weight M is either an
// explicit positive number or "auto", resolved against the centralized
// reference multiplier after the instance is drawn.
struct Config {
  GenConfig gen;             // [instance]; gen.penalty holds the explicit M
  bool penalty_auto = true;  // [instance] M = auto
  double edge_prob = 0.2;    // [graph]
  RunConfig algo;            // [oracle] and [algorithm]
  std::string csv_path = "trace.csv";  // [output]
};

// Parses line-oriented `key = value` content. `[section]` headers scope the
// keys (instance, graph, oracle, algorithm, output), `#` starts a comment
// anywhere on a line, blank lines are skipped, and later assignments to the
// same key win. Every unknown section or key, malformed line, type mismatch,
// and out-of-range value raises ConfigError naming the offending line.
// Cross-field requirements (such as box_lo < box_hi) are enforced when the
// instance is generated. An empty text yields all defaults.
Config parse_config(const std::string& text);

// parse_config over the file's bytes; unreadable path raises ConfigError.
Config load_config(const std::string& path);

}  // namespace dpd
