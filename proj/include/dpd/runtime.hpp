#pragma once

#include <cstdint>
#include <vector>

#include "dpd/graph.hpp"
#include "dpd/oracle.hpp"
#include "dpd/problem.hpp"
#include "dpd/rng.hpp"

namespace dpd {

// Everything one agent owns across rounds: its allocation slice, the latest
// primal-dual pair, its sample memory with the fitted surrogate, and a
// private random stream.
struct AgentState {
  double allocation = 0.0;
  std::vector<double> last_x;
  double last_rho = 0.0;
  double last_mu = 0.0;
  SampleSet samples;
  MaxAffineEstimate estimate;
  SplitMix64 rng{0};
};

struct RunConfig {
  int iters = 2000;
  double alpha0 = 0.5;      // step size alpha0 / (t+1)^alpha_exp
  double alpha_exp = 1.0;   // in (0.5, 1] so steps sum to infinity, squares converge
  SamplingSchedule schedule;
  int k_max = 30;           // sample memory capacity
  int refit_every = 1;      // rounds between surrogate refits
  double slack_weight = 100.0;
  bool eps_diag = false;    // per-round epsilon certification (diagnostic)
  int eps_grid = 200;
  std::uint64_t seed = 0;
};

struct TraceRow {
  int t = 0;
  double alpha = 0.0;
  double cost_true = 0.0;         // sum of true agent costs at the round's iterates
  double cost_relaxed_est = 0.0;  // sum of surrogate costs plus penalty terms
  double cost_err_abs = 0.0;      // |f_star - cost_true|
  double coupling_violation = 0.0;
  double alloc_residual = 0.0;    // |sum of allocations - rhs|
  double max_rho = 0.0;
  double mu_min = 0.0;
  double mu_max = 0.0;
  bool has_eps = false;
  double eps_hat = 0.0;  // max over agents of the certified epsilon
};

struct Trace {
  std::vector<TraceRow> rows;
  double f_star = 0.0;
  double lambda_star = 0.0;
};

// Multiplier reads during the allocation update go through this interface so
// tests can substitute an access-auditing double and verify that agent i
// touches only its own and its graph neighbors' multipliers.
class MultiplierBoard {
 public:
  virtual ~MultiplierBoard() = default;
  virtual double read(int reader, int owner) const = 0;
};

class PublishedMultipliers final : public MultiplierBoard {
 public:
  explicit PublishedMultipliers(std::vector<double> mu) : mu_(std::move(mu)) {}
  double read(int, int owner) const override { return mu_.at(static_cast<std::size_t>(owner)); }

 private:
  std::vector<double> mu_;
};

// Even allocation split, fresh per-agent random streams (derived from the
// seed and the agent index), empty sample memories. Throws ConfigError when
// the graph size disagrees with the instance or a RunConfig value is out of
// range.
std::vector<AgentState> init(const ProblemInstance& inst, const Graph& g,
                             const RunConfig& cfg);

// alpha0 / (t+1)^alpha_exp.
double step_size(int t, const RunConfig& cfg);

// Allocation update from published multipliers: each agent adds
// alpha * sum over its neighbors (ascending order) of (own mu - neighbor mu).
// Every edge contributes the same difference once with each sign, so the
// allocation total is conserved.
void update_allocations(std::vector<AgentState>& states, const Graph& g, double alpha,
                        const MultiplierBoard& board);

// One synchronous round: every agent draws a sample around its last iterate
// (the whole box during the free rounds), prunes to capacity, refits on the
// cadence, and solves its penalty subproblem; after all solves finish the
// multipliers are published and the allocations updated. Agent work is
// independent and runs on n_threads; results are bit-identical for any
// thread count. A failing agent aborts the round with its id and the round
// index attached.
void round(int t, std::vector<AgentState>& states, const ProblemInstance& inst,
           const Graph& g, const RunConfig& cfg, int n_threads = 1);

// Executes rounds 0..iters-1 and records one trace row per round. The
// centralized reference optimum is computed once up front, only for the
// error column; the algorithm itself never sees it.
Trace run(const ProblemInstance& inst, const Graph& g, const RunConfig& cfg,
          int n_threads = 1);

}  // namespace dpd
