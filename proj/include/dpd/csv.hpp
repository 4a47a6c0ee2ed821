#pragma once

#include <string>

#include "dpd/runtime.hpp"

namespace dpd {

// Column order of the trace CSV; one row per round.
extern const char* const kTraceHeader;

// Shortest decimal form carrying 17 significant digits (std::to_chars), so
// every value round-trips to the identical double and no locale can touch
// the formatting.
std::string format_real(double v);

// Header plus one line per trace row, '\n' endings. The eps_hat column is
// left empty on rows recorded without the epsilon diagnostic.
std::string trace_to_csv(const Trace& trace);

// Byte-exact write (binary mode, no newline translation). Raises ConfigError
// when the path cannot be opened or the write fails.
void write_file(const std::string& path, const std::string& content);

}  // namespace dpd
