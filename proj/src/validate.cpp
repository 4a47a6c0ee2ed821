#include "dpd/validate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <utility>

#include "dpd/errors.hpp"
#include "dpd/graph.hpp"
#include "dpd/lp.hpp"
#include "dpd/oracle.hpp"
#include "dpd/problem.hpp"
#include "dpd/rng.hpp"
#include "dpd/runtime.hpp"
#include "dpd/subsolver.hpp"

namespace dpd {
namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

AgentProblem draw_agent(SplitMix64& rng, int dim, const GenConfig& gen) {
  AgentProblem ag;
  ag.dim = dim;
  for (int j = 0; j < dim; ++j) {
    ag.quad_diag.push_back(rng.uniform(gen.q_min, gen.q_max));
    ag.lin.push_back(rng.uniform(-gen.c_range, gen.c_range));
    ag.coupling_row.push_back(rng.uniform(gen.a_min, gen.a_max));
    ag.box_lo.push_back(gen.box_lo);
    ag.box_hi.push_back(gen.box_hi);
  }
  return ag;
}

// Samples the true cost at k box points (pairwise separated by at least
// min_sep in the max norm) and fits the max-affine surrogate.
MaxAffineEstimate fit_from(const AgentProblem& ag, SplitMix64& rng, int k,
                           double slack_weight, double min_sep) {
  SampleSet set;
  set.capacity = k;
  while (static_cast<int>(set.samples.size()) < k) {
    Sample s;
    for (int j = 0; j < ag.dim; ++j) s.point.push_back(rng.uniform(ag.box_lo[j], ag.box_hi[j]));
    bool apart = true;
    for (const Sample& have : set.samples) {
      double gap = 0.0;
      for (int j = 0; j < ag.dim; ++j)
        gap = std::max(gap, std::abs(have.point[static_cast<std::size_t>(j)] -
                                     s.point[static_cast<std::size_t>(j)]));
      if (gap < min_sep) apart = false;
    }
    if (!apart) continue;
    s.value = eval_true(ag, s.point);
    s.birth_round = static_cast<int>(set.samples.size());
    set.samples.push_back(s);
  }
  return fit_max_affine(set, slack_weight);
}

Subproblem random_subproblem(SplitMix64& rng, const GenConfig& gen, double penalty,
                             bool surrogate) {
  const int dim = 1 + static_cast<int>(rng.next() % 3);
  const AgentProblem ag = draw_agent(rng, dim, gen);
  const YRange yr = y_range(ag.coupling_row, ag.box_lo, ag.box_hi);
  const double y = rng.uniform(yr.y_min - 2.0, yr.y_max + 2.0);
  if (!surrogate) return make_true_subproblem(ag, y, penalty);
  const int k = 4 + static_cast<int>(rng.next() % 7);
  return make_surrogate_subproblem(fit_from(ag, rng, k, 1e6, 1e-4), ag, y, penalty);
}

// Three affine pieces in one variable whose middle slope makes the dual of
// the fitted subproblem flat on a whole interval of multipliers: allocating
// exactly the coupling value at the first kink puts the dual maximum on the
// plateau [-gamma2/a, -gamma1/a], so only the tie-break pins the answer.
Subproblem plateau_subproblem(SplitMix64& rng, double penalty, double& mu_star) {
  const double a = rng.uniform(0.5, 1.5);
  const double g2 = -rng.uniform(0.3, 1.0);
  const double g1 = g2 - rng.uniform(0.2, 1.0);
  const double g3 = rng.uniform(0.2, 2.0);
  const double x12 = rng.uniform(-0.8, -0.1);
  const double x23 = rng.uniform(0.1, 0.8);

  MaxAffineEstimate est;
  for (const auto& [slope, beta] :
       {std::pair{g1, (g2 - g1) * x12}, std::pair{g2, 0.0}, std::pair{g3, (g2 - g3) * x23}}) {
    MaxAffinePiece piece;
    piece.slope = {slope};
    piece.anchor_point = {0.0};
    piece.anchor_value = beta;
    est.pieces.push_back(piece);
  }

  AgentProblem ag;
  ag.dim = 1;
  ag.quad_diag = {1.0};
  ag.lin = {0.0};
  ag.coupling_row = {a};
  ag.box_lo = {-1.0};
  ag.box_hi = {1.0};
  mu_star = -g2 / a;
  return make_surrogate_subproblem(est, ag, a * x12, penalty);
}

}  // namespace

std::vector<SuiteResult> run_validation_suites(const Config& cfg, int n_threads) {
  ProblemInstance inst = generate_instance(cfg.gen, cfg.algo.seed);
  if (cfg.penalty_auto) inst.penalty = auto_penalty(inst);
  const Graph g = generate_erdos_renyi(cfg.gen.n_agents, cfg.edge_prob, cfg.algo.seed);
  const double M = inst.penalty;

  // Instance generation owns substreams 0..n-1 of the seed and the runtime
  // n..2n-1; the suites draw from the block after both.
  const std::uint64_t block = 2 * static_cast<std::uint64_t>(cfg.gen.n_agents);
  auto stream = [&](std::uint64_t k) { return SplitMix64::substream(cfg.algo.seed, block + k); };

  std::vector<SuiteResult> out;
  auto add = [&](const char* name, const std::function<void(SuiteResult&)>& body) {
    SuiteResult r;
    r.name = name;
    try {
      body(r);
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("error: ") + e.what();
    }
    out.push_back(std::move(r));
  };

  add("multiplier_bounds", [&](SuiteResult& r) {
    SplitMix64 rng = stream(0);
    int violations = 0;
    const int quad_trials = 1500, fit_trials = 100;
    for (int i = 0; i < quad_trials + fit_trials; ++i) {
      const Subproblem sub = random_subproblem(rng, cfg.gen, M, i >= quad_trials);
      const PrimalDualPair pair = solve_subproblem(sub);
      if (!(pair.mu >= 0.0 && pair.mu <= M)) ++violations;
    }
    r.passed = violations == 0;
    r.detail = std::to_string(quad_trials + fit_trials) + " solves, " +
               std::to_string(violations) + " multiplier(s) outside [0, M]";
  });

  add("strong_duality", [&](SuiteResult& r) {
    SplitMix64 rng = stream(1);
    double worst = 0.0;
    const int trials = 400;
    for (int i = 0; i < trials; ++i) {
      const Subproblem sub = random_subproblem(rng, cfg.gen, M, i % 4 == 3);
      const PrimalDualPair pair = solve_subproblem(sub);
      const double gap =
          std::abs(pair.value - dual_value(sub, pair.mu)) / (1.0 + std::abs(pair.value));
      worst = std::max(worst, gap);
    }
    r.passed = worst <= 1e-6;
    r.detail = std::to_string(trials) + " subproblems, worst scaled gap " + fmt(worst);
  });

  add("subderivative_identity", [&](SuiteResult& r) {
    SplitMix64 rng = stream(2);
    const double h = 1e-4;
    int tested = 0;
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const AgentProblem ag = draw_agent(rng, 1 + static_cast<int>(rng.next() % 3), cfg.gen);
      const YRange yr = y_range(ag.coupling_row, ag.box_lo, ag.box_hi);
      const double span = yr.y_max - yr.y_min;
      const double y = rng.uniform(yr.y_min + 0.1 * span, yr.y_max - 0.1 * span);
      const double mu_lo = solve_subproblem(make_true_subproblem(ag, y - h, M)).mu;
      const double mu_hi = solve_subproblem(make_true_subproblem(ag, y + h, M)).mu;
      if (std::abs(mu_hi - mu_lo) > 1e-6) continue;  // too close to a kink
      const double fd = (primal_value(make_true_subproblem(ag, y + h, M)) -
                         primal_value(make_true_subproblem(ag, y - h, M))) /
                        (2.0 * h);
      const double mu = solve_subproblem(make_true_subproblem(ag, y, M)).mu;
      worst = std::max(worst, std::abs(-mu - fd));
      ++tested;
    }
    r.passed = tested >= 40 && worst <= 1e-3;
    r.detail = std::to_string(tested) + " differentiable points, worst |mu + dp/dy| " + fmt(worst);
  });

  add("primal_shape", [&](SuiteResult& r) {
    SplitMix64 rng = stream(3);
    bool ok = true;
    for (int i = 0; i < 50 && ok; ++i) {
      const AgentProblem ag = draw_agent(rng, 1, cfg.gen);
      const YRange yr = y_range(ag.coupling_row, ag.box_lo, ag.box_hi);
      const double p_top = primal_value(make_true_subproblem(ag, yr.y_max, M));
      const double p_bot = primal_value(make_true_subproblem(ag, yr.y_min, M));
      double prev = lp::kInf;
      for (int k = 0; k <= 40; ++k) {
        const double y = (yr.y_min - 2.0) +
                         (yr.y_max + 2.0 - (yr.y_min - 2.0)) * static_cast<double>(k) / 40.0;
        const double p = primal_value(make_true_subproblem(ag, y, M));
        if (p > prev + 1e-9 * (1.0 + std::abs(prev))) ok = false;
        prev = p;
        if (y >= yr.y_max && std::abs(p - p_top) > 1e-8 * (1.0 + std::abs(p_top))) ok = false;
        if (y <= yr.y_min) {
          const double affine = p_bot + M * (yr.y_min - y);
          if (std::abs(p - affine) > 1e-6 * (1.0 + std::abs(affine))) ok = false;
        }
      }
    }
    r.passed = ok;
    r.detail = "50 one-dimensional penalty functions, flat tail and -M slope checked";
  });

  add("tie_break", [&](SuiteResult& r) {
    SplitMix64 rng = stream(4);
    const double penalty = 10.0;
    const double tol = penalty / 4000.0;
    const int grid_n = 1001;
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      double mu_star = 0.0;
      const Subproblem sub = plateau_subproblem(rng, penalty, mu_star);
      const double mu_hat = smallest_max_multiplier(sub, tol);
      double best = -lp::kInf;
      for (int k = 0; k < grid_n; ++k) {
        const double mu = penalty * static_cast<double>(k) / (grid_n - 1);
        best = std::max(best, dual_value(sub, mu));
      }
      double leftmost = penalty;
      for (int k = 0; k < grid_n; ++k) {
        const double mu = penalty * static_cast<double>(k) / (grid_n - 1);
        if (dual_value(sub, mu) >= best - 1e-9) {
          leftmost = mu;
          break;
        }
      }
      const double step = penalty / (grid_n - 1);
      worst = std::max(worst, std::abs(mu_hat - leftmost) - step);
    }
    r.passed = worst <= 10.0 * tol;
    r.detail = "20 flat dual regions, worst distance to the leftmost maximizer " +
               fmt(std::max(0.0, worst));
  });

  add("interpolation", [&](SuiteResult& r) {
    SplitMix64 rng = stream(5);
    double worst_slack = 0.0, worst_interp = 0.0;
    for (int i = 0; i < 60; ++i) {
      const int dim = 1 + static_cast<int>(rng.next() % 3);
      const AgentProblem ag = draw_agent(rng, dim, cfg.gen);
      SampleSet set;
      const int k = 4 + static_cast<int>(rng.next() % 22);
      set.capacity = k;
      while (static_cast<int>(set.samples.size()) < k) {
        Sample s;
        for (int j = 0; j < dim; ++j) s.point.push_back(rng.uniform(ag.box_lo[j], ag.box_hi[j]));
        bool apart = true;
        for (const Sample& have : set.samples) {
          double gap = 0.0;
          for (int j = 0; j < dim; ++j)
            gap = std::max(gap, std::abs(have.point[static_cast<std::size_t>(j)] -
                                         s.point[static_cast<std::size_t>(j)]));
          if (gap < 1e-4) apart = false;
        }
        if (!apart) continue;
        s.value = eval_true(ag, s.point);
        s.birth_round = static_cast<int>(set.samples.size());
        set.samples.push_back(s);
      }
      const MaxAffineEstimate est = fit_max_affine(set, 1e6);
      worst_slack = std::max(worst_slack, est.fit_slack);
      for (const Sample& s : set.samples)
        worst_interp = std::max(worst_interp, std::abs(eval_estimate(est, s.point) - s.value));
    }
    r.passed = worst_slack <= 1e-7 && worst_interp <= 1e-6;
    r.detail = "60 fits, worst slack " + fmt(worst_slack) + ", worst anchor error " +
               fmt(worst_interp);
  });

  add("epsilon_decay", [&](SuiteResult& r) {
    SplitMix64 rng = stream(6);
    double sum_small = 0.0, sum_large = 0.0;
    for (int s = 0; s < 20; ++s) {
      const AgentProblem ag = draw_agent(rng, 1, cfg.gen);
      const YRange yr = y_range(ag.coupling_row, ag.box_lo, ag.box_hi);
      const double y0 = yr.y_min + 0.3 * (yr.y_max - yr.y_min);
      const auto p_eval = [&](double y) {
        return primal_value(make_true_subproblem(ag, y, M));
      };
      for (const int k : {8, 64}) {
        const MaxAffineEstimate est = fit_from(ag, rng, k, 1e6, 1e-6);
        const Subproblem sub = make_surrogate_subproblem(est, ag, y0, M);
        const double mu = solve_subproblem(sub).mu;
        const double eps = epsilon_estimate(p_eval, -mu, y0, yr, 200);
        (k == 8 ? sum_small : sum_large) += eps;
      }
    }
    r.passed = sum_large <= 0.25 * sum_small && sum_small > 0.0;
    r.detail = "20 seeds, mean epsilon " + fmt(sum_small / 20.0) + " at K=8 vs " +
               fmt(sum_large / 20.0) + " at K=64";
  });

  // The last two suites share one algorithm run at a capped round count.
  RunConfig rc = cfg.algo;
  rc.iters = std::clamp(cfg.algo.iters, 200, 600);
  std::optional<Trace> shared;
  auto shared_trace = [&]() -> const Trace& {
    if (!shared) shared = run(inst, g, rc, n_threads);
    return *shared;
  };

  add("trace_invariants", [&](SuiteResult& r) {
    const Trace& trace = shared_trace();
    bool ok = true;
    for (const TraceRow& row : trace.rows) {
      if (row.alloc_residual > 1e-9 * (1.0 + std::abs(inst.rhs))) ok = false;
      if (row.mu_min < 0.0 || row.mu_max > M) ok = false;
    }
    r.passed = ok && static_cast<int>(trace.rows.size()) == rc.iters;
    r.detail = std::to_string(rc.iters) +
               " rounds, allocation conservation and multiplier range per row";
  });

  add("penalty_exactness", [&](SuiteResult& r) {
    const Trace& trace = shared_trace();
    double worst = 0.0;
    for (const TraceRow& row : trace.rows)
      if (row.t >= rc.iters / 2) worst = std::max(worst, row.max_rho);
    r.passed = worst <= 1e-6;
    r.detail = "max slack " + fmt(worst) + " over rounds " + std::to_string(rc.iters / 2) +
               ".." + std::to_string(rc.iters - 1) + " at M = " + fmt(M);
  });

  return out;
}

}  // namespace dpd
