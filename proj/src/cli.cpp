#include "dpd/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <iostream>

#include "dpd/csv.hpp"
#include "dpd/graph.hpp"
#include "dpd/problem.hpp"
#include "dpd/runtime.hpp"
#include "dpd/validate.hpp"

namespace dpd {
namespace {

ProblemInstance build_instance(const Config& cfg) {
  ProblemInstance inst = generate_instance(cfg.gen, cfg.algo.seed);
  if (cfg.penalty_auto) inst.penalty = auto_penalty(inst);
  return inst;
}

}  // namespace

int cmd_run(const Config& cfg, const std::string& out_path, int n_threads) {
  const auto t0 = std::chrono::steady_clock::now();
  const ProblemInstance inst = build_instance(cfg);
  const Graph g = generate_erdos_renyi(cfg.gen.n_agents, cfg.edge_prob, cfg.algo.seed);
  const Trace trace = run(inst, g, cfg.algo, n_threads);
  write_file(out_path, trace_to_csv(trace));
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::cout.precision(6);
  std::cout << "rounds=" << trace.rows.size() << " f_star=" << trace.f_star;
  if (!trace.rows.empty()) {
    const TraceRow& last = trace.rows.back();
    std::cout << " final_cost_err=" << last.cost_err_abs << " final_rel_err="
              << last.cost_err_abs / std::max(1.0, std::abs(trace.f_star));
  }
  std::cout << " elapsed_s=" << secs << " csv=" << out_path << "\n";
  return 0;
}

int cmd_reference(const Config& cfg) {
  const ProblemInstance inst = build_instance(cfg);
  const ReferenceSolution ref = centralized_reference(inst, 1e-9);

  std::cout << "f_star = " << format_real(ref.f_star) << "\n";
  std::cout << "lambda_star = " << format_real(ref.lambda_star) << "\n";
  std::cout << "M = " << format_real(inst.penalty) << (cfg.penalty_auto ? " (auto)" : " (config)")
            << "\n";
  std::cout << "slater_margin = " << format_real(slater_check(inst)) << "\n";

  int total_dim = 0;
  double max_range = 0.0;
  for (const AgentProblem& ag : inst.agents) {
    total_dim += ag.dim;
    for (int j = 0; j < ag.dim; ++j)
      max_range = std::max(max_range, ag.box_hi[static_cast<std::size_t>(j)] -
                                          ag.box_lo[static_cast<std::size_t>(j)]);
  }
  if (total_dim <= 4) {
    // Budget about 2e6 grid points total, split evenly across dimensions.
    const double per_dim = std::floor(std::pow(2e6, 1.0 / total_dim));
    const double res = max_range > 0.0 ? max_range / (per_dim - 1.0) : 1.0;
    const ReferenceSolution grid = grid_oracle(inst, res);
    std::cout << "grid_f_star = " << format_real(grid.f_star) << "\n";
    std::cout << "grid_gap = " << format_real(std::abs(grid.f_star - ref.f_star)) << "\n";
  }
  return 0;
}

int cmd_validate(const Config& cfg, int n_threads) {
  const std::vector<SuiteResult> suites = run_validation_suites(cfg, n_threads);
  bool all = true;
  for (const SuiteResult& s : suites) {
    std::cout << (s.passed ? "PASS " : "FAIL ") << s.name << " - " << s.detail << "\n";
    all = all && s.passed;
  }
  if (all) {
    std::cout << "all " << suites.size() << " suites passed\n";
    return 0;
  }
  int failed = 0;
  for (const SuiteResult& s : suites) failed += s.passed ? 0 : 1;
  std::cout << failed << " suite(s) failed\n";
  return 3;
}

}  // namespace dpd
