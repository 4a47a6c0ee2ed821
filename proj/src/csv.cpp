#include "dpd/csv.hpp"

#include <charconv>
#include <fstream>

#include "dpd/errors.hpp"

namespace dpd {

const char* const kTraceHeader =
    "t,alpha,cost_true,cost_relaxed_est,cost_err_abs,coupling_violation,"
    "alloc_residual,max_rho,mu_min,mu_max,eps_hat";

std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string trace_to_csv(const Trace& trace) {
  std::string out(kTraceHeader);
  out += '\n';
  for (const TraceRow& r : trace.rows) {
    out += std::to_string(r.t);
    for (double v : {r.alpha, r.cost_true, r.cost_relaxed_est, r.cost_err_abs,
                     r.coupling_violation, r.alloc_residual, r.max_rho, r.mu_min, r.mu_max}) {
      out += ',';
      out += format_real(v);
    }
    out += ',';
    if (r.has_eps) out += format_real(r.eps_hat);
    out += '\n';
  }
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("cannot open '" + path + "' for writing");
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  f.flush();
  if (!f) throw ConfigError("failed while writing '" + path + "'");
}

}  // namespace dpd
