#include "dpd/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "dpd/errors.hpp"

namespace dpd {
namespace {

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ConfigError("config line " + std::to_string(line) + ": " + msg);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double to_real(std::string_view v, int line, std::string_view key) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    fail(line, "value '" + std::string(v) + "' for " + std::string(key) + " is not a number");
  if (!std::isfinite(out))
    fail(line, std::string(key) + " must be finite");
  return out;
}

int to_int(std::string_view v, int line, std::string_view key) {
  int out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    fail(line, "value '" + std::string(v) + "' for " + std::string(key) + " is not an integer");
  return out;
}

std::uint64_t to_seed(std::string_view v, int line, std::string_view key) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    fail(line, "value '" + std::string(v) + "' for " + std::string(key) +
                   " is not a non-negative integer");
  return out;
}

bool to_bool(std::string_view v, int line, std::string_view key) {
  if (v == "true") return true;
  if (v == "false") return false;
  fail(line, std::string(key) + " must be true or false");
}

void assign_instance(Config& cfg, std::string_view key, std::string_view value, int line) {
  if (key == "n_agents") {
    cfg.gen.n_agents = to_int(value, line, key);
    if (cfg.gen.n_agents < 1) fail(line, "n_agents must be >= 1");
  } else if (key == "dim") {
    cfg.gen.dim = to_int(value, line, key);
    if (cfg.gen.dim < 1) fail(line, "dim must be >= 1");
  } else if (key == "box_lo") {
    cfg.gen.box_lo = to_real(value, line, key);
  } else if (key == "box_hi") {
    cfg.gen.box_hi = to_real(value, line, key);
  } else if (key == "q_min") {
    cfg.gen.q_min = to_real(value, line, key);
    if (!(cfg.gen.q_min > 0.0)) fail(line, "q_min must be > 0");
  } else if (key == "q_max") {
    cfg.gen.q_max = to_real(value, line, key);
    if (!(cfg.gen.q_max > 0.0)) fail(line, "q_max must be > 0");
  } else if (key == "c_range") {
    cfg.gen.c_range = to_real(value, line, key);
    if (cfg.gen.c_range < 0.0) fail(line, "c_range must be >= 0");
  } else if (key == "a_min") {
    cfg.gen.a_min = to_real(value, line, key);
    if (!(cfg.gen.a_min > 0.0)) fail(line, "a_min must be > 0");
  } else if (key == "a_max") {
    cfg.gen.a_max = to_real(value, line, key);
    if (!(cfg.gen.a_max > 0.0)) fail(line, "a_max must be > 0");
  } else if (key == "slater_margin") {
    cfg.gen.slater_margin = to_real(value, line, key);
    if (!(cfg.gen.slater_margin > 0.0)) fail(line, "slater_margin must be > 0");
  } else if (key == "M") {
    if (value == "auto") {
      cfg.penalty_auto = true;
    } else {
      cfg.penalty_auto = false;
      cfg.gen.penalty = to_real(value, line, key);
      if (!(cfg.gen.penalty > 0.0)) fail(line, "M must be > 0 or auto");
    }
  } else if (key == "b") {
    cfg.gen.b_override = to_real(value, line, key);
  } else {
    fail(line, "unknown key '" + std::string(key) + "' in section [instance]");
  }
}

void assign_graph(Config& cfg, std::string_view key, std::string_view value, int line) {
  if (key == "edge_prob") {
    cfg.edge_prob = to_real(value, line, key);
    if (cfg.edge_prob < 0.0 || cfg.edge_prob > 1.0)
      fail(line, "edge_prob must lie in [0, 1]");
  } else {
    fail(line, "unknown key '" + std::string(key) + "' in section [graph]");
  }
}

void assign_oracle(Config& cfg, std::string_view key, std::string_view value, int line) {
  if (key == "free_rounds") {
    cfg.algo.schedule.free_rounds = to_int(value, line, key);
    if (cfg.algo.schedule.free_rounds < 1) fail(line, "free_rounds must be >= 1");
  } else if (key == "r0") {
    cfg.algo.schedule.r0 = to_real(value, line, key);
    if (!(cfg.algo.schedule.r0 > 0.0)) fail(line, "r0 must be > 0");
  } else if (key == "r_min") {
    cfg.algo.schedule.r_min = to_real(value, line, key);
    if (!(cfg.algo.schedule.r_min > 0.0)) fail(line, "r_min must be > 0");
  } else if (key == "decay") {
    cfg.algo.schedule.decay = to_real(value, line, key);
    if (!(cfg.algo.schedule.decay > 0.0) || cfg.algo.schedule.decay > 1.0)
      fail(line, "decay must lie in (0, 1]");
  } else if (key == "K_max") {
    cfg.algo.k_max = to_int(value, line, key);
    if (cfg.algo.k_max < 1) fail(line, "K_max must be >= 1");
  } else if (key == "refit_every") {
    cfg.algo.refit_every = to_int(value, line, key);
    if (cfg.algo.refit_every < 1) fail(line, "refit_every must be >= 1");
  } else if (key == "slack_weight") {
    cfg.algo.slack_weight = to_real(value, line, key);
    if (!(cfg.algo.slack_weight > 0.0)) fail(line, "slack_weight must be > 0");
  } else {
    fail(line, "unknown key '" + std::string(key) + "' in section [oracle]");
  }
}

void assign_algorithm(Config& cfg, std::string_view key, std::string_view value, int line) {
  if (key == "iters") {
    cfg.algo.iters = to_int(value, line, key);
    if (cfg.algo.iters < 0) fail(line, "iters must be >= 0");
  } else if (key == "alpha0") {
    cfg.algo.alpha0 = to_real(value, line, key);
    if (!(cfg.algo.alpha0 > 0.0)) fail(line, "alpha0 must be > 0");
  } else if (key == "alpha_exp") {
    cfg.algo.alpha_exp = to_real(value, line, key);
    if (!(cfg.algo.alpha_exp > 0.5) || cfg.algo.alpha_exp > 1.0)
      fail(line, "alpha_exp must lie in (0.5, 1]");
  } else if (key == "eps_diag") {
    cfg.algo.eps_diag = to_bool(value, line, key);
  } else if (key == "eps_grid") {
    cfg.algo.eps_grid = to_int(value, line, key);
    if (cfg.algo.eps_grid < 2) fail(line, "eps_grid must be >= 2");
  } else if (key == "seed") {
    cfg.algo.seed = to_seed(value, line, key);
  } else {
    fail(line, "unknown key '" + std::string(key) + "' in section [algorithm]");
  }
}

void assign_output(Config& cfg, std::string_view key, std::string_view value, int line) {
  if (key == "csv") {
    cfg.csv_path = std::string(value);
  } else {
    fail(line, "unknown key '" + std::string(key) + "' in section [output]");
  }
}

}  // namespace

Config parse_config(const std::string& text) {
  Config cfg;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view s = raw;
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;

    if (s.front() == '[') {
      if (s.back() != ']' || s.size() < 3) fail(line_no, "malformed section header");
      const std::string_view name = trim(s.substr(1, s.size() - 2));
      if (name != "instance" && name != "graph" && name != "oracle" &&
          name != "algorithm" && name != "output")
        fail(line_no, "unknown section '" + std::string(name) + "'");
      section = std::string(name);
      continue;
    }

    const auto eq = s.find('=');
    if (eq == std::string_view::npos) fail(line_no, "expected key = value");
    const std::string_view key = trim(s.substr(0, eq));
    const std::string_view value = trim(s.substr(eq + 1));
    if (key.empty()) fail(line_no, "missing key before '='");
    if (value.empty()) fail(line_no, "missing value for '" + std::string(key) + "'");
    if (section.empty())
      fail(line_no, "key '" + std::string(key) + "' appears before any [section]");

    if (section == "instance") assign_instance(cfg, key, value, line_no);
    else if (section == "graph") assign_graph(cfg, key, value, line_no);
    else if (section == "oracle") assign_oracle(cfg, key, value, line_no);
    else if (section == "algorithm") assign_algorithm(cfg, key, value, line_no);
    else assign_output(cfg, key, value, line_no);
  }
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_config(buf.str());
}

}  // namespace dpd
