#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace dpd {

// One agent's private data: true cost f(x) = 1/2 x.diag(quad_diag).x + lin.x,
// coupling contribution coupling_row.x, and a box domain.
struct AgentProblem {
  int dim = 0;
  std::vector<double> quad_diag;
  std::vector<double> lin;
  std::vector<double> coupling_row;
  std::vector<double> box_lo;
  std::vector<double> box_hi;
};

// The whole coupled instance: minimize the sum of the agents' true costs
// subject to sum_i coupling_row_i . x_i <= rhs, each x_i in its box. penalty
// is the weight M on the per-agent slack in the relaxed formulation.
struct ProblemInstance {
  std::vector<AgentProblem> agents;
  double rhs = 0.0;
  double penalty = 0.0;
};

enum class RefMethod { dual_bisection, grid };

struct ReferenceSolution {
  double f_star = 0.0;
  double lambda_star = 0.0;  // meaningful for dual_bisection; 0 for grid
  std::vector<std::vector<double>> x_star;
  RefMethod method = RefMethod::dual_bisection;
};

// Knobs for random instance generation. The coupling rhs is derived, not
// drawn: rhs = (sum of per-agent coupling minima over the boxes)
//            + slater_margin * (sum of per-agent coupling ranges),
// which guarantees a strictly feasible point for any slater_margin > 0.
// b_override replaces that rule with an explicit value; generation then fails
// if the value leaves the coupled constraint infeasible.
struct GenConfig {
  int n_agents = 10;
  int dim = 3;
  double box_lo = -5.0;
  double box_hi = 5.0;
  double q_min = 0.5;
  double q_max = 2.0;
  double c_range = 1.0;
  double a_min = 0.1;
  double a_max = 1.0;
  double slater_margin = 0.25;
  double penalty = 100.0;
  std::optional<double> b_override;
};

// Draws an instance from cfg. Agent i consumes its own PRNG substream
// (SplitMix64::substream(seed, i)), in the fixed order quad_diag, lin,
// coupling_row, coordinate by coordinate, so instances reproduce bit for bit.
// Throws ConfigError for invalid ranges and GenerationError when b_override
// makes the instance infeasible.
ProblemInstance generate_instance(const GenConfig& cfg, std::uint64_t seed);

double eval_true(const AgentProblem& agent, const std::vector<double>& x);
std::vector<double> eval_true_subgradient(const AgentProblem& agent,
                                          const std::vector<double>& x);

// Feasibility margin rhs - sum_i min over the box of coupling_row_i . x_i.
// Positive iff a strictly feasible point exists.
double slater_check(const ProblemInstance& inst);

// Ground truth by scalar dual bisection: maximizes the concave dual
//   q(lambda) = sum_i min over box of [f_i(x) + lambda a_i.x] - lambda rhs
// over lambda >= 0 (inner minimizers are per-coordinate clamps). Returns
// f_star = q at the final lambda together with the corresponding primal.
// Throws GenerationError when the instance has no Slater point and
// NumericalError when bracketing or bisection does not converge.
ReferenceSolution centralized_reference(const ProblemInstance& inst, double tol);

// Ground truth by exhaustive search over the Cartesian grid of all agent
// boxes at the given step, keeping the best point with
// sum_i a_i.x_i <= rhs. Guarded to total dimension <= 4. Throws
// GenerationError when no grid point is feasible.
ReferenceSolution grid_oracle(const ProblemInstance& inst, double resolution);

// Penalty choice for cfg penalty "auto": max(100, 10 * lambda_star).
double auto_penalty(const ProblemInstance& inst);

}  // namespace dpd
