#pragma once

#include <functional>
#include <variant>
#include <vector>

#include "dpd/oracle.hpp"
#include "dpd/problem.hpp"

namespace dpd {

struct YRange {
  double y_min = 0.0;
  double y_max = 0.0;
};

// A per-agent subproblem: minimize cost(x) + penalty * rho over the box,
// subject to coupling_row.x <= allocation + rho and rho >= 0. The cost is
// either the fitted max-affine surrogate or, on reference paths, the true
// quadratic itself.
using SubproblemCost = std::variant<MaxAffineEstimate, AgentProblem>;

struct Subproblem {
  SubproblemCost cost;
  std::vector<double> coupling_row;
  std::vector<double> box_lo;
  std::vector<double> box_hi;
  double allocation = 0.0;
  double penalty = 0.0;
};

struct PrimalDualPair {
  std::vector<double> x;
  double rho = 0.0;
  double mu = 0.0;
  double value = 0.0;
};

Subproblem make_surrogate_subproblem(MaxAffineEstimate estimate, const AgentProblem& agent,
                                     double allocation, double penalty);
Subproblem make_true_subproblem(const AgentProblem& agent, double allocation,
                                double penalty);

// Range of coupling values reachable inside the box, componentwise closed form.
YRange y_range(const std::vector<double>& coupling_row, const std::vector<double>& box_lo,
               const std::vector<double>& box_hi);

struct InnerMin {
  std::vector<double> x;
  double value = 0.0;
};

// Minimizes cost(x) + mu * coupling_row.x over the box (the allocation plays
// no role here). Among minimizers, returns the one with the smallest coupling
// value, found by a lexicographic second stage at tolerance
// 1e-9 * (1 + |first stage value|). The reported value is the first-stage
// minimum. For the true-quadratic cost the minimizer is a per-coordinate
// clamp and is unique.
InnerMin inner_min(const Subproblem& sub, double mu);

// Dual function q(mu) = inner_min value - mu * allocation, concave on [0, penalty].
double dual_value(const Subproblem& sub, double mu);

// Bisection tolerance used by solve_subproblem: 1e-8 * max(1, penalty).
double default_multiplier_tol(double penalty);

// Smallest maximizer of q over [0, penalty], located through the right
// derivative s(mu) = coupling value of the lexicographic inner minimizer
// minus the allocation (nonincreasing in mu). Returns 0 when s(0) <= 0 and
// penalty when s(penalty) > 0; otherwise bisects for the leftmost sign
// change. Bisection continues past the width tolerance until the tangent
// crossing bound certifies q(returned) is within 1e-9 * (1 + |q|) of the
// maximum, so downstream strong-duality checks hold at any penalty scale.
double smallest_max_multiplier(const Subproblem& sub, double tol);

// Primal-dual solve: (x, rho) from one epigraph LP for the surrogate cost, or
// from the final multiplier's inner minimizer for the true-quadratic cost;
// mu always from smallest_max_multiplier (LP row duals at degenerate optima
// would not honor the smallest-multiplier rule).
PrimalDualPair solve_subproblem(const Subproblem& sub);

// The value field of solve_subproblem: the primal function of the allocation.
double primal_value(const Subproblem& sub);

// Diagnostic lower bound on the linearization error epsilon at y0: the
// largest violation of the subgradient inequality
//   p(z) >= p(y0) + slope * (z - y0)
// over a uniform grid of grid_n points on [yr.y_min, yr.y_max], clipped at 0.
double epsilon_estimate(const std::function<double(double)>& p_eval, double slope,
                        double y0, const YRange& yr, int grid_n);

}  // namespace dpd
