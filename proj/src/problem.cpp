#include "dpd/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dpd/errors.hpp"
#include "dpd/rng.hpp"

namespace dpd {
namespace {

void check_agent(const AgentProblem& a) {
  const std::size_t n = static_cast<std::size_t>(a.dim);
  if (a.dim <= 0 || a.quad_diag.size() != n || a.lin.size() != n ||
      a.coupling_row.size() != n || a.box_lo.size() != n || a.box_hi.size() != n)
    throw std::invalid_argument("problem: agent dimensions inconsistent");
  for (std::size_t j = 0; j < n; ++j) {
    if (!(a.quad_diag[j] > 0.0))
      throw std::invalid_argument("problem: quadratic diagonal must be positive");
    if (!(a.box_lo[j] < a.box_hi[j]))
      throw std::invalid_argument("problem: box must have positive width");
  }
}

double coupling_min(const AgentProblem& a) {
  double s = 0.0;
  for (int j = 0; j < a.dim; ++j)
    s += std::min(a.coupling_row[j] * a.box_lo[j], a.coupling_row[j] * a.box_hi[j]);
  return s;
}

double coupling_max(const AgentProblem& a) {
  double s = 0.0;
  for (int j = 0; j < a.dim; ++j)
    s += std::max(a.coupling_row[j] * a.box_lo[j], a.coupling_row[j] * a.box_hi[j]);
  return s;
}

// Per-coordinate minimizer of f(x) + lambda a.x over the box.
std::vector<double> inner_minimizer(const AgentProblem& a, double lambda) {
  std::vector<double> x(a.dim);
  for (int j = 0; j < a.dim; ++j) {
    const double free_opt = (-a.lin[j] - lambda * a.coupling_row[j]) / a.quad_diag[j];
    x[j] = std::clamp(free_opt, a.box_lo[j], a.box_hi[j]);
  }
  return x;
}

}  // namespace

ProblemInstance generate_instance(const GenConfig& cfg, std::uint64_t seed) {
  if (cfg.n_agents < 1) throw ConfigError("n_agents must be >= 1");
  if (cfg.dim < 1) throw ConfigError("dim must be >= 1");
  if (!(cfg.q_min > 0.0) || cfg.q_min > cfg.q_max)
    throw ConfigError("quadratic range requires 0 < q_min <= q_max");
  if (!(cfg.a_min > 0.0) || cfg.a_min > cfg.a_max)
    throw ConfigError("coupling range requires 0 < a_min <= a_max");
  if (!(cfg.box_lo < cfg.box_hi)) throw ConfigError("box requires box_lo < box_hi");
  if (cfg.c_range < 0.0) throw ConfigError("c_range must be >= 0");
  if (!(cfg.slater_margin > 0.0)) throw ConfigError("slater_margin must be > 0");
  if (!(cfg.penalty > 0.0)) throw ConfigError("penalty must be > 0");

  ProblemInstance inst;
  inst.penalty = cfg.penalty;
  inst.agents.resize(static_cast<std::size_t>(cfg.n_agents));
  for (int i = 0; i < cfg.n_agents; ++i) {
    SplitMix64 rng = SplitMix64::substream(seed, static_cast<std::uint64_t>(i));
    AgentProblem& a = inst.agents[static_cast<std::size_t>(i)];
    a.dim = cfg.dim;
    a.quad_diag.resize(cfg.dim);
    a.lin.resize(cfg.dim);
    a.coupling_row.resize(cfg.dim);
    a.box_lo.assign(cfg.dim, cfg.box_lo);
    a.box_hi.assign(cfg.dim, cfg.box_hi);
    for (int j = 0; j < cfg.dim; ++j) a.quad_diag[j] = rng.uniform(cfg.q_min, cfg.q_max);
    for (int j = 0; j < cfg.dim; ++j) a.lin[j] = rng.uniform(-cfg.c_range, cfg.c_range);
    for (int j = 0; j < cfg.dim; ++j) a.coupling_row[j] = rng.uniform(cfg.a_min, cfg.a_max);
  }

  double lo_sum = 0.0, range_sum = 0.0;
  for (const AgentProblem& a : inst.agents) {
    lo_sum += coupling_min(a);
    range_sum += coupling_max(a) - coupling_min(a);
  }
  inst.rhs = cfg.b_override ? *cfg.b_override : lo_sum + cfg.slater_margin * range_sum;
  if (!(slater_check(inst) > 0.0))
    throw GenerationError("coupling rhs leaves no strictly feasible point");
  return inst;
}

double eval_true(const AgentProblem& agent, const std::vector<double>& x) {
  if (x.size() != static_cast<std::size_t>(agent.dim))
    throw std::invalid_argument("problem: point dimension mismatch");
  double v = 0.0;
  for (int j = 0; j < agent.dim; ++j)
    v += 0.5 * agent.quad_diag[j] * x[j] * x[j] + agent.lin[j] * x[j];
  return v;
}

std::vector<double> eval_true_subgradient(const AgentProblem& agent,
                                          const std::vector<double>& x) {
  if (x.size() != static_cast<std::size_t>(agent.dim))
    throw std::invalid_argument("problem: point dimension mismatch");
  std::vector<double> g(agent.dim);
  for (int j = 0; j < agent.dim; ++j) g[j] = agent.quad_diag[j] * x[j] + agent.lin[j];
  return g;
}

double slater_check(const ProblemInstance& inst) {
  double s = inst.rhs;
  for (const AgentProblem& a : inst.agents) {
    check_agent(a);
    s -= coupling_min(a);
  }
  return s;
}

ReferenceSolution centralized_reference(const ProblemInstance& inst, double tol) {
  if (inst.agents.empty()) throw std::invalid_argument("problem: no agents");
  if (!(tol > 0.0)) throw std::invalid_argument("problem: tol must be > 0");
  if (!(slater_check(inst) > 0.0))
    throw GenerationError("instance has no strictly feasible point");

  // Derivative of the dual at lambda: coupling value of the unique inner
  // minimizer minus rhs. Nonincreasing in lambda.
  auto slope = [&inst](double lambda) {
    double s = -inst.rhs;
    for (const AgentProblem& a : inst.agents) {
      const std::vector<double> x = inner_minimizer(a, lambda);
      for (int j = 0; j < a.dim; ++j) s += a.coupling_row[j] * x[j];
    }
    return s;
  };

  double lambda_hat = 0.0;
  if (slope(0.0) > 0.0) {
    double hi = 1.0;
    int doublings = 0;
    while (slope(hi) > 0.0) {
      if (++doublings > 200)
        throw NumericalError("centralized reference: dual bracket did not close");
      hi *= 2.0;
    }
    double lo = 0.0;
    int steps = 0;
    while (hi - lo > tol) {
      if (++steps > 200)
        throw NumericalError("centralized reference: bisection exceeded 200 steps");
      const double mid = 0.5 * (lo + hi);
      if (slope(mid) > 0.0)
        lo = mid;
      else
        hi = mid;
    }
    lambda_hat = hi;  // the endpoint with slope <= 0 keeps the primal feasible
  }

  ReferenceSolution ref;
  ref.method = RefMethod::dual_bisection;
  ref.lambda_star = lambda_hat;
  ref.f_star = -lambda_hat * inst.rhs;
  ref.x_star.reserve(inst.agents.size());
  for (const AgentProblem& a : inst.agents) {
    std::vector<double> x = inner_minimizer(a, lambda_hat);
    double ax = 0.0;
    for (int j = 0; j < a.dim; ++j) ax += a.coupling_row[j] * x[j];
    ref.f_star += eval_true(a, x) + lambda_hat * ax;
    ref.x_star.push_back(std::move(x));
  }
  return ref;
}

ReferenceSolution grid_oracle(const ProblemInstance& inst, double resolution) {
  if (!(resolution > 0.0)) throw std::invalid_argument("problem: resolution must be > 0");
  int total_dim = 0;
  for (const AgentProblem& a : inst.agents) {
    check_agent(a);
    total_dim += a.dim;
  }
  if (total_dim < 1 || total_dim > 4)
    throw std::invalid_argument("problem: grid oracle handles total dimension 1..4 only");

  // Costs and coupling terms are separable per coordinate, so the search
  // needs only per-coordinate tables of (coupling contribution, cost
  // contribution) and a depth-first walk accumulating partial sums.
  struct Coord {
    std::vector<double> pts, cup, cost;
    int agent, j;
  };
  std::vector<Coord> coords;
  coords.reserve(static_cast<std::size_t>(total_dim));
  for (std::size_t i = 0; i < inst.agents.size(); ++i) {
    const AgentProblem& a = inst.agents[i];
    for (int j = 0; j < a.dim; ++j) {
      Coord c;
      c.agent = static_cast<int>(i);
      c.j = j;
      const double lo = a.box_lo[j], hi = a.box_hi[j];
      const long n_steps = static_cast<long>(std::floor((hi - lo) / resolution + 1e-9));
      for (long k = 0; k <= n_steps; ++k) c.pts.push_back(lo + k * resolution);
      if (c.pts.back() < hi - 1e-12 * (1.0 + std::abs(hi))) c.pts.push_back(hi);
      for (double x : c.pts) {
        c.cup.push_back(a.coupling_row[j] * x);
        c.cost.push_back(0.5 * a.quad_diag[j] * x * x + a.lin[j] * x);
      }
      coords.push_back(std::move(c));
    }
  }

  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> idx(coords.size(), 0), best_idx;
  auto walk = [&](auto&& self, std::size_t d, double cup, double cost) -> void {
    if (d == coords.size()) {
      if (cup <= inst.rhs && cost < best) {
        best = cost;
        best_idx = idx;
      }
      return;
    }
    const Coord& c = coords[d];
    for (std::size_t k = 0; k < c.pts.size(); ++k) {
      idx[d] = k;
      self(self, d + 1, cup + c.cup[k], cost + c.cost[k]);
    }
  };
  walk(walk, 0, 0.0, 0.0);

  if (best_idx.empty())
    throw GenerationError("grid oracle: no feasible grid point");

  ReferenceSolution ref;
  ref.method = RefMethod::grid;
  ref.f_star = best;
  ref.lambda_star = 0.0;
  ref.x_star.resize(inst.agents.size());
  for (std::size_t i = 0; i < inst.agents.size(); ++i)
    ref.x_star[i].resize(inst.agents[i].dim);
  for (std::size_t d = 0; d < coords.size(); ++d)
    ref.x_star[coords[d].agent][coords[d].j] = coords[d].pts[best_idx[d]];
  return ref;
}

double auto_penalty(const ProblemInstance& inst) {
  const ReferenceSolution ref = centralized_reference(inst, 1e-9);
  return std::max(100.0, 10.0 * ref.lambda_star);
}

}  // namespace dpd
