#include "dpd/subsolver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "dpd/errors.hpp"
#include "dpd/lp.hpp"

namespace dpd {
namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return s;
}

void check_subproblem(const Subproblem& sub) {
  const std::size_t n = sub.coupling_row.size();
  if (n == 0 || sub.box_lo.size() != n || sub.box_hi.size() != n)
    throw std::invalid_argument("subsolver: inconsistent dimensions");
  for (std::size_t j = 0; j < n; ++j)
    if (!(sub.box_lo[j] <= sub.box_hi[j]))
      throw std::invalid_argument("subsolver: box lower bound exceeds upper bound");
  if (!(sub.penalty > 0.0)) throw std::invalid_argument("subsolver: penalty must be > 0");
  if (!std::isfinite(sub.allocation))
    throw std::invalid_argument("subsolver: allocation must be finite");
  if (const auto* est = std::get_if<MaxAffineEstimate>(&sub.cost)) {
    if (est->pieces.empty()) throw std::invalid_argument("subsolver: empty estimate");
    for (const auto& piece : est->pieces)
      if (piece.slope.size() != n || piece.anchor_point.size() != n)
        throw std::invalid_argument("subsolver: estimate dimension mismatch");
  } else {
    const auto& agent = std::get<AgentProblem>(sub.cost);
    if (agent.dim != static_cast<int>(n) || agent.quad_diag.size() != n ||
        agent.lin.size() != n)
      throw std::invalid_argument("subsolver: agent cost dimension mismatch");
    for (double q : agent.quad_diag)
      if (!(q > 0.0))
        throw std::invalid_argument("subsolver: agent cost needs positive curvature");
  }
}

// Epigraph LP for min over the box of estimate(x) + mu * a.x, variables
// (x_0..x_{n-1}, s): each piece contributes slope.x - s <= slope.anchor - value.
lp::Problem inner_lp(const MaxAffineEstimate& est, const Subproblem& sub, double mu) {
  const int n = static_cast<int>(sub.coupling_row.size());
  lp::Problem p(n + 1);
  for (int j = 0; j < n; ++j) {
    p.objective[j] = mu * sub.coupling_row[j];
    p.lower[j] = sub.box_lo[j];
    p.upper[j] = sub.box_hi[j];
  }
  p.objective[n] = 1.0;  // epigraph variable, free
  for (const MaxAffinePiece& piece : est.pieces) {
    std::vector<double> row(static_cast<std::size_t>(n) + 1, 0.0);
    double rhs = -piece.anchor_value;
    for (int j = 0; j < n; ++j) {
      row[j] = piece.slope[j];
      rhs += piece.slope[j] * piece.anchor_point[j];
    }
    row[n] = -1.0;
    p.add_ineq(row, rhs);
  }
  return p;
}

// Tie-broken inner minimization: among minimizers of the inner LP, the
// lexicographic stage picks the smallest coupling value a.x.
lp::Solution lex_inner(const lp::Problem& p, const Subproblem& sub) {
  std::vector<double> secondary(p.objective.size(), 0.0);
  for (std::size_t j = 0; j < sub.coupling_row.size(); ++j)
    secondary[j] = sub.coupling_row[j];
  const lp::Solution sol = lp::solve_lexicographic(p, secondary, 1e-9);
  if (sol.status != lp::Status::optimal)
    throw NumericalError("subsolver: inner minimization LP failed");
  return sol;
}

std::vector<double> quad_minimizer(const AgentProblem& agent, const Subproblem& sub,
                                   double mu) {
  std::vector<double> x(agent.dim);
  for (int j = 0; j < agent.dim; ++j)
    x[j] = std::clamp((-agent.lin[j] - mu * sub.coupling_row[j]) / agent.quad_diag[j],
                      sub.box_lo[j], sub.box_hi[j]);
  return x;
}

// State of the dual at one multiplier: q value, a supergradient, and the
// classified sign of the right derivative. Allocations that sit exactly on a
// coupling value reachable at a cost kink make the true right derivative
// exactly zero, and LP arithmetic reproduces that zero only to within
// roundoff, so the sign is classified against a scale-aware tie tolerance.
// The stored slope stays raw; only the classification is tolerant.
struct Probe {
  double q = 0.0;
  double slope = 0.0;
  bool right_derivative_nonpos = false;
};

double slope_tie_eps(const Subproblem& sub) {
  double reach = std::abs(sub.allocation);
  for (std::size_t j = 0; j < sub.coupling_row.size(); ++j)
    reach += std::abs(sub.coupling_row[j]) *
             std::max(std::abs(sub.box_lo[j]), std::abs(sub.box_hi[j]));
  return 1e-11 * (1.0 + reach);
}

Probe probe_at(const Subproblem& sub, double mu) {
  Probe pr;
  if (const auto* est = std::get_if<MaxAffineEstimate>(&sub.cost)) {
    const lp::Problem p = inner_lp(*est, sub, mu);
    const lp::Solution lex = lex_inner(p, sub);
    pr.q = dot(p.objective, lex.primal) - mu * sub.allocation;
    pr.slope = lex.objective_value - sub.allocation;
  } else {
    const auto& agent = std::get<AgentProblem>(sub.cost);
    const std::vector<double> x = quad_minimizer(agent, sub, mu);
    const double ax = dot(sub.coupling_row, x);
    pr.q = eval_true(agent, x) + mu * (ax - sub.allocation);
    pr.slope = ax - sub.allocation;
  }
  pr.right_derivative_nonpos = pr.slope <= slope_tie_eps(sub);
  return pr;
}

}  // namespace

Subproblem make_surrogate_subproblem(MaxAffineEstimate estimate, const AgentProblem& agent,
                                     double allocation, double penalty) {
  Subproblem sub;
  sub.cost = std::move(estimate);
  sub.coupling_row = agent.coupling_row;
  sub.box_lo = agent.box_lo;
  sub.box_hi = agent.box_hi;
  sub.allocation = allocation;
  sub.penalty = penalty;
  check_subproblem(sub);
  return sub;
}

Subproblem make_true_subproblem(const AgentProblem& agent, double allocation,
                                double penalty) {
  Subproblem sub;
  sub.cost = agent;
  sub.coupling_row = agent.coupling_row;
  sub.box_lo = agent.box_lo;
  sub.box_hi = agent.box_hi;
  sub.allocation = allocation;
  sub.penalty = penalty;
  check_subproblem(sub);
  return sub;
}

YRange y_range(const std::vector<double>& coupling_row, const std::vector<double>& box_lo,
               const std::vector<double>& box_hi) {
  if (coupling_row.size() != box_lo.size() || coupling_row.size() != box_hi.size())
    throw std::invalid_argument("subsolver: y_range dimension mismatch");
  YRange r;
  for (std::size_t j = 0; j < coupling_row.size(); ++j) {
    r.y_min += std::min(coupling_row[j] * box_lo[j], coupling_row[j] * box_hi[j]);
    r.y_max += std::max(coupling_row[j] * box_lo[j], coupling_row[j] * box_hi[j]);
  }
  return r;
}

InnerMin inner_min(const Subproblem& sub, double mu) {
  check_subproblem(sub);
  if (mu < 0.0 || mu > sub.penalty)
    throw std::invalid_argument("subsolver: multiplier outside [0, penalty]");
  InnerMin out;
  if (const auto* est = std::get_if<MaxAffineEstimate>(&sub.cost)) {
    const lp::Problem p = inner_lp(*est, sub, mu);
    const lp::Solution lex = lex_inner(p, sub);
    out.value = dot(p.objective, lex.primal);
    out.x.assign(lex.primal.begin(), lex.primal.end() - 1);
    return out;
  }
  const auto& agent = std::get<AgentProblem>(sub.cost);
  out.x = quad_minimizer(agent, sub, mu);
  out.value = eval_true(agent, out.x) + mu * dot(sub.coupling_row, out.x);
  return out;
}

double dual_value(const Subproblem& sub, double mu) {
  check_subproblem(sub);
  if (mu < 0.0 || mu > sub.penalty)
    throw std::invalid_argument("subsolver: multiplier outside [0, penalty]");
  // The dual needs only the inner value, so the tie-break stage is skipped.
  if (const auto* est = std::get_if<MaxAffineEstimate>(&sub.cost)) {
    const lp::Problem p = inner_lp(*est, sub, mu);
    const lp::Solution sol = lp::solve(p);
    if (sol.status != lp::Status::optimal)
      throw NumericalError("subsolver: inner minimization LP failed");
    return sol.objective_value - mu * sub.allocation;
  }
  const auto& agent = std::get<AgentProblem>(sub.cost);
  const std::vector<double> x = quad_minimizer(agent, sub, mu);
  return eval_true(agent, x) + mu * (dot(sub.coupling_row, x) - sub.allocation);
}

double default_multiplier_tol(double penalty) { return 1e-8 * std::max(1.0, penalty); }

double smallest_max_multiplier(const Subproblem& sub, double tol) {
  check_subproblem(sub);
  if (!(tol > 0.0)) throw std::invalid_argument("subsolver: tol must be > 0");
  const double M = sub.penalty;
  Probe lo_pr = probe_at(sub, 0.0);
  if (lo_pr.right_derivative_nonpos) return 0.0;
  Probe hi_pr = probe_at(sub, M);
  if (!hi_pr.right_derivative_nonpos) return M;

  const bool quad_cost = std::holds_alternative<AgentProblem>(sub.cost);
  double lo = 0.0, hi = M;
  for (int iter = 0; iter < 200; ++iter) {
    // Certificate: the two supporting tangents cross above every q value, so
    // their crossing bounds the maximum. Stop once hi is provably within
    // 1e-9 * (1 + |q(hi)|) of the maximum (and, on the quadratic path, the
    // residual at hi is small enough for an exact-primal recovery), never
    // before the width tolerance is met.
    const double gap_tol = 1e-9 * (1.0 + std::abs(hi_pr.q));
    const double denom = lo_pr.slope - hi_pr.slope;
    double gap = lp::kInf;
    if (denom > 0.0) {
      const double nu = (hi_pr.q - lo_pr.q + lo_pr.slope * lo - hi_pr.slope * hi) / denom;
      gap = std::max(0.0, lo_pr.q + lo_pr.slope * (nu - lo) - hi_pr.q);
    }
    const bool residual_ok =
        !quad_cost || std::abs(hi_pr.slope) <= gap_tol / (2.0 * M);
    if (hi - lo <= tol && gap <= gap_tol && residual_ok) return hi;
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) return hi;  // double precision exhausted
    const Probe mid_pr = probe_at(sub, mid);
    if (mid_pr.right_derivative_nonpos) {
      hi = mid;
      hi_pr = mid_pr;
    } else {
      lo = mid;
      lo_pr = mid_pr;
    }
  }
  throw NumericalError("subsolver: multiplier bisection did not converge");
}

PrimalDualPair solve_subproblem(const Subproblem& sub) {
  check_subproblem(sub);
  const double M = sub.penalty;
  PrimalDualPair out;
  out.mu = smallest_max_multiplier(sub, default_multiplier_tol(M));
  const std::size_t n = sub.coupling_row.size();
  if (const auto* est = std::get_if<MaxAffineEstimate>(&sub.cost)) {
    // One epigraph LP over (x, rho, s): minimize s + M rho subject to the
    // pieces, the coupled row a.x - rho <= y, rho >= 0, and the box.
    lp::Problem p(static_cast<int>(n) + 2);
    for (std::size_t j = 0; j < n; ++j) {
      p.lower[j] = sub.box_lo[j];
      p.upper[j] = sub.box_hi[j];
    }
    p.lower[n] = 0.0;       // rho
    p.objective[n] = M;     // rho weight; s stays free
    p.objective[n + 1] = 1.0;
    for (const MaxAffinePiece& piece : est->pieces) {
      std::vector<double> row(n + 2, 0.0);
      double rhs = -piece.anchor_value;
      for (std::size_t j = 0; j < n; ++j) {
        row[j] = piece.slope[j];
        rhs += piece.slope[j] * piece.anchor_point[j];
      }
      row[n + 1] = -1.0;
      p.add_ineq(row, rhs);
    }
    std::vector<double> coupling(n + 2, 0.0);
    for (std::size_t j = 0; j < n; ++j) coupling[j] = sub.coupling_row[j];
    coupling[n] = -1.0;
    p.add_ineq(coupling, sub.allocation);
    const lp::Solution sol = lp::solve(p);
    if (sol.status != lp::Status::optimal)
      throw NumericalError("subsolver: subproblem epigraph LP failed");
    out.x.assign(sol.primal.begin(), sol.primal.begin() + static_cast<std::ptrdiff_t>(n));
    out.rho = std::max(0.0, sol.primal[n]);
    out.value = sol.objective_value;
    return out;
  }
  // True-quadratic path: recover the primal from the final multiplier. At the
  // interior the bisection has driven the residual to ~0; at the clamped ends
  // the recovery is exact.
  const auto& agent = std::get<AgentProblem>(sub.cost);
  out.x = quad_minimizer(agent, sub, out.mu);
  out.rho = std::max(0.0, dot(sub.coupling_row, out.x) - sub.allocation);
  out.value = eval_true(agent, out.x) + M * out.rho;
  return out;
}

double primal_value(const Subproblem& sub) { return solve_subproblem(sub).value; }

double epsilon_estimate(const std::function<double(double)>& p_eval, double slope,
                        double y0, const YRange& yr, int grid_n) {
  if (grid_n < 2) throw std::invalid_argument("subsolver: grid_n must be >= 2");
  if (!(yr.y_min <= yr.y_max)) throw std::invalid_argument("subsolver: empty y range");
  const double p0 = p_eval(y0);
  double worst = 0.0;  // the subgradient inequality can only be violated upward
  for (int k = 0; k < grid_n; ++k) {
    const double z =
        yr.y_min + (yr.y_max - yr.y_min) * static_cast<double>(k) / (grid_n - 1);
    worst = std::max(worst, p0 + (z - y0) * slope - p_eval(z));
  }
  return worst;
}

}  // namespace dpd
