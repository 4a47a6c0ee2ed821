#include "dpd/runtime.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <string>
#include <thread>
#include <utility>

#include "dpd/errors.hpp"
#include "dpd/subsolver.hpp"

namespace dpd {
namespace {

void check_run_config(const RunConfig& cfg) {
  if (cfg.iters < 0) throw ConfigError("runtime: iters must be >= 0");
  if (!(cfg.alpha0 > 0.0)) throw ConfigError("runtime: alpha0 must be > 0");
  if (!(cfg.alpha_exp > 0.5) || !(cfg.alpha_exp <= 1.0))
    throw ConfigError("runtime: alpha_exp must lie in (0.5, 1]");
  if (cfg.schedule.free_rounds < 1) throw ConfigError("runtime: free_rounds must be >= 1");
  if (!(cfg.schedule.r0 > 0.0)) throw ConfigError("runtime: r0 must be > 0");
  if (!(cfg.schedule.r_min > 0.0)) throw ConfigError("runtime: r_min must be > 0");
  if (!(cfg.schedule.decay > 0.0) || !(cfg.schedule.decay <= 1.0))
    throw ConfigError("runtime: decay must lie in (0, 1]");
  if (cfg.k_max < 1) throw ConfigError("runtime: K_max must be >= 1");
  if (cfg.refit_every < 1) throw ConfigError("runtime: refit_every must be >= 1");
  if (!(cfg.slack_weight > 0.0)) throw ConfigError("runtime: slack_weight must be > 0");
  if (cfg.eps_grid < 2) throw ConfigError("runtime: eps_grid must be >= 2");
}

// Phase 1 and 2 for one agent: sample, prune, refit on cadence, solve.
void agent_work(int t, AgentState& st, const AgentProblem& agent, double penalty,
                const RunConfig& cfg) {
  const std::vector<double>* center = st.last_x.empty() ? nullptr : &st.last_x;
  st.samples.samples.push_back(draw_sample(agent, center, t, cfg.schedule, st.rng));
  if (st.samples.samples.size() > static_cast<std::size_t>(st.samples.capacity))
    st.samples = prune(st.samples, st.last_x);
  if (t % cfg.refit_every == 0)
    st.estimate = fit_max_affine(st.samples, cfg.slack_weight);
  const Subproblem sub =
      make_surrogate_subproblem(st.estimate, agent, st.allocation, penalty);
  const PrimalDualPair pair = solve_subproblem(sub);
  st.last_x = pair.x;
  st.last_rho = pair.rho;
  st.last_mu = pair.mu;
}

}  // namespace

std::vector<AgentState> init(const ProblemInstance& inst, const Graph& g,
                             const RunConfig& cfg) {
  const int n = static_cast<int>(inst.agents.size());
  if (g.n != n) throw ConfigError("runtime: graph size does not match the instance");
  check_run_config(cfg);
  std::vector<AgentState> states(n);
  for (int i = 0; i < n; ++i) {
    states[i].allocation = inst.rhs / n;
    states[i].samples.capacity = cfg.k_max;
    // Streams 0..n-1 of the seed belong to instance generation; the runtime
    // takes the next block so reusing one seed for both stays independent.
    states[i].rng = SplitMix64::substream(cfg.seed, static_cast<std::uint64_t>(n + i));
  }
  return states;
}

double step_size(int t, const RunConfig& cfg) {
  if (t < 0) throw std::invalid_argument("runtime: round index must be >= 0");
  return cfg.alpha0 / std::pow(static_cast<double>(t) + 1.0, cfg.alpha_exp);
}

void update_allocations(std::vector<AgentState>& states, const Graph& g, double alpha,
                        const MultiplierBoard& board) {
  if (g.n != static_cast<int>(states.size()))
    throw std::invalid_argument("runtime: graph size does not match the states");
  std::vector<double> delta(states.size(), 0.0);
  for (int i = 0; i < g.n; ++i) {
    const double own = board.read(i, i);
    double sum = 0.0;
    for (int j : neighbors(g, i)) sum += own - board.read(i, j);
    delta[static_cast<std::size_t>(i)] = alpha * sum;
  }
  for (std::size_t i = 0; i < states.size(); ++i) states[i].allocation += delta[i];
}

void round(int t, std::vector<AgentState>& states, const ProblemInstance& inst,
           const Graph& g, const RunConfig& cfg, int n_threads) {
  const int n = static_cast<int>(states.size());
  if (static_cast<int>(inst.agents.size()) != n || g.n != n)
    throw std::invalid_argument("runtime: states/instance/graph sizes disagree");
  if (t < 0) throw std::invalid_argument("runtime: round index must be >= 0");

  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(n));
  auto work = [&](int i) {
    try {
      agent_work(t, states[static_cast<std::size_t>(i)],
                 inst.agents[static_cast<std::size_t>(i)], inst.penalty, cfg);
    } catch (...) {
      failures[static_cast<std::size_t>(i)] = std::current_exception();
    }
  };

  const int workers = std::max(1, std::min(n_threads, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) work(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) work(i);
      });
    for (std::thread& th : pool) th.join();
  }

  for (int i = 0; i < n; ++i) {
    if (!failures[static_cast<std::size_t>(i)]) continue;
    try {
      std::rethrow_exception(failures[static_cast<std::size_t>(i)]);
    } catch (const std::exception& e) {
      throw NumericalError("agent " + std::to_string(i) + " failed at round " +
                           std::to_string(t) + ": " + e.what());
    }
  }

  std::vector<double> published(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) published[static_cast<std::size_t>(i)] = states[i].last_mu;
  update_allocations(states, g, step_size(t, cfg), PublishedMultipliers(std::move(published)));
}

Trace run(const ProblemInstance& inst, const Graph& g, const RunConfig& cfg,
          int n_threads) {
  std::vector<AgentState> states = init(inst, g, cfg);
  const int n = static_cast<int>(states.size());

  Trace trace;
  const ReferenceSolution ref = centralized_reference(inst, 1e-9);
  trace.f_star = ref.f_star;
  trace.lambda_star = ref.lambda_star;

  // The true penalty functions never change, so the epsilon diagnostic reuses
  // one grid of their values per agent; each term then mirrors
  // epsilon_estimate on that cached grid.
  std::vector<YRange> ranges;
  std::vector<std::vector<double>> grid_z(static_cast<std::size_t>(n));
  std::vector<std::vector<double>> grid_p(static_cast<std::size_t>(n));
  if (cfg.eps_diag) {
    for (int i = 0; i < n; ++i) {
      const AgentProblem& ag = inst.agents[static_cast<std::size_t>(i)];
      const YRange yr = y_range(ag.coupling_row, ag.box_lo, ag.box_hi);
      ranges.push_back(yr);
      for (int k = 0; k < cfg.eps_grid; ++k) {
        const double z = yr.y_min + (yr.y_max - yr.y_min) * static_cast<double>(k) /
                                        (cfg.eps_grid - 1);
        grid_z[static_cast<std::size_t>(i)].push_back(z);
        grid_p[static_cast<std::size_t>(i)].push_back(
            primal_value(make_true_subproblem(ag, z, inst.penalty)));
      }
    }
  }

  trace.rows.reserve(static_cast<std::size_t>(std::max(0, cfg.iters)));
  std::vector<double> alloc_before(static_cast<std::size_t>(n));
  for (int t = 0; t < cfg.iters; ++t) {
    for (int i = 0; i < n; ++i)
      alloc_before[static_cast<std::size_t>(i)] = states[static_cast<std::size_t>(i)].allocation;
    round(t, states, inst, g, cfg, n_threads);

    TraceRow row;
    row.t = t;
    row.alpha = step_size(t, cfg);
    double coupling = 0.0, alloc_sum = 0.0;
    row.mu_min = states[0].last_mu;
    row.mu_max = states[0].last_mu;
    for (int i = 0; i < n; ++i) {
      const AgentState& st = states[static_cast<std::size_t>(i)];
      const AgentProblem& ag = inst.agents[static_cast<std::size_t>(i)];
      row.cost_true += eval_true(ag, st.last_x);
      row.cost_relaxed_est +=
          eval_estimate(st.estimate, st.last_x) + inst.penalty * st.last_rho;
      for (std::size_t j = 0; j < st.last_x.size(); ++j)
        coupling += ag.coupling_row[j] * st.last_x[j];
      alloc_sum += st.allocation;
      row.max_rho = std::max(row.max_rho, st.last_rho);
      row.mu_min = std::min(row.mu_min, st.last_mu);
      row.mu_max = std::max(row.mu_max, st.last_mu);
    }
    row.cost_err_abs = std::abs(trace.f_star - row.cost_true);
    row.coupling_violation = std::max(0.0, coupling - inst.rhs);
    row.alloc_residual = std::abs(alloc_sum - inst.rhs);

    if (cfg.eps_diag) {
      row.has_eps = true;
      for (int i = 0; i < n; ++i) {
        const AgentState& st = states[static_cast<std::size_t>(i)];
        const AgentProblem& ag = inst.agents[static_cast<std::size_t>(i)];
        const double y0 = alloc_before[static_cast<std::size_t>(i)];
        const double p0 = primal_value(make_true_subproblem(ag, y0, inst.penalty));
        const auto& zs = grid_z[static_cast<std::size_t>(i)];
        const auto& ps = grid_p[static_cast<std::size_t>(i)];
        double eps = 0.0;
        for (std::size_t k = 0; k < zs.size(); ++k)
          eps = std::max(eps, p0 + (zs[k] - y0) * (-st.last_mu) - ps[k]);
        row.eps_hat = std::max(row.eps_hat, eps);
      }
    }
    trace.rows.push_back(row);
  }
  return trace;
}

}  // namespace dpd
