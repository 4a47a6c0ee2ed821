#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpd/errors.hpp"
#include "dpd/graph.hpp"
#include "dpd/problem.hpp"
#include "dpd/runtime.hpp"
#include "dpd/subsolver.hpp"

using dpd::AgentState;
using dpd::GenConfig;
using dpd::Graph;
using dpd::ProblemInstance;
using dpd::RunConfig;
using dpd::Trace;
using dpd::TraceRow;

namespace {

ProblemInstance small_instance(int n, int dim, std::uint64_t seed,
                               std::optional<double> b = std::nullopt) {
  GenConfig gc;
  gc.n_agents = n;
  gc.dim = dim;
  gc.box_lo = -2.0;
  gc.box_hi = 2.0;
  gc.a_min = 0.3;
  gc.penalty = 50.0;
  gc.b_override = b;
  return dpd::generate_instance(gc, seed);
}

RunConfig quick_config(int iters, std::uint64_t seed) {
  RunConfig cfg;
  cfg.iters = iters;
  cfg.schedule.free_rounds = 3;
  cfg.k_max = 10;
  cfg.seed = seed;
  return cfg;
}

bool same_bits(double a, double b) {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

bool same_row(const TraceRow& a, const TraceRow& b) {
  return a.t == b.t && same_bits(a.alpha, b.alpha) && same_bits(a.cost_true, b.cost_true) &&
         same_bits(a.cost_relaxed_est, b.cost_relaxed_est) &&
         same_bits(a.cost_err_abs, b.cost_err_abs) &&
         same_bits(a.coupling_violation, b.coupling_violation) &&
         same_bits(a.alloc_residual, b.alloc_residual) && same_bits(a.max_rho, b.max_rho) &&
         same_bits(a.mu_min, b.mu_min) && same_bits(a.mu_max, b.mu_max) &&
         a.has_eps == b.has_eps && same_bits(a.eps_hat, b.eps_hat);
}

// Records which multiplier slots each reader touched.
struct AuditBoard final : dpd::MultiplierBoard {
  std::vector<double> mu;
  mutable std::vector<std::set<int>> seen;
  explicit AuditBoard(std::vector<double> m) : mu(std::move(m)), seen(mu.size()) {}
  double read(int reader, int owner) const override {
    seen.at(static_cast<std::size_t>(reader)).insert(owner);
    return mu.at(static_cast<std::size_t>(owner));
  }
};

}  // namespace

TEST_CASE("init splits the budget evenly and derives per-agent streams") {
  const ProblemInstance inst = small_instance(10, 1, 7, 10.0);
  const Graph g = dpd::generate_erdos_renyi(10, 0.4, 7);
  const RunConfig cfg = quick_config(5, 99);

  std::vector<AgentState> states = dpd::init(inst, g, cfg);
  REQUIRE(states.size() == 10);
  for (const AgentState& st : states) {
    CHECK(st.allocation == 1.0);
    CHECK(st.last_x.empty());
    CHECK(st.last_rho == 0.0);
    CHECK(st.last_mu == 0.0);
    CHECK(st.samples.samples.empty());
    CHECK(st.samples.capacity == cfg.k_max);
    CHECK(st.estimate.pieces.empty());
  }

  // Agent i's stream continues the seed's substream block at n + i, past the
  // n streams instance generation consumes, so sharing one seed between
  // generation and the run never correlates the draws.
  dpd::SplitMix64 expect = dpd::SplitMix64::substream(99, 10);
  dpd::SplitMix64 gen_stream = dpd::SplitMix64::substream(99, 0);
  CHECK(states[0].rng.next() == expect.next());
  CHECK(states[0].rng.next() == expect.next());
  dpd::SplitMix64 probe = dpd::init(inst, g, cfg)[0].rng;
  CHECK(probe.next() != gen_stream.next());

  const ProblemInstance one = small_instance(1, 2, 11);
  const Graph g1{1, {}};
  const AgentState only = dpd::init(one, g1, cfg).at(0);
  CHECK(only.allocation == one.rhs);
}

TEST_CASE("init rejects size mismatches and out-of-range settings") {
  const ProblemInstance inst = small_instance(4, 1, 3);
  const Graph g = dpd::generate_erdos_renyi(4, 0.6, 3);
  const Graph wrong{5, {{0, 1}}};
  const RunConfig ok = quick_config(5, 1);

  CHECK_THROWS_AS(dpd::init(inst, wrong, ok), dpd::ConfigError);

  auto reject = [&](auto mutate) {
    RunConfig bad = ok;
    mutate(bad);
    CHECK_THROWS_AS(dpd::init(inst, g, bad), dpd::ConfigError);
  };
  reject([](RunConfig& c) { c.iters = -1; });
  reject([](RunConfig& c) { c.alpha0 = 0.0; });
  reject([](RunConfig& c) { c.alpha0 = -0.5; });
  reject([](RunConfig& c) { c.alpha_exp = 0.5; });
  reject([](RunConfig& c) { c.alpha_exp = 1.01; });
  reject([](RunConfig& c) { c.schedule.free_rounds = 0; });
  reject([](RunConfig& c) { c.schedule.r0 = 0.0; });
  reject([](RunConfig& c) { c.schedule.r_min = 0.0; });
  reject([](RunConfig& c) { c.schedule.decay = 0.0; });
  reject([](RunConfig& c) { c.schedule.decay = 1.5; });
  reject([](RunConfig& c) { c.k_max = 0; });
  reject([](RunConfig& c) { c.refit_every = 0; });
  reject([](RunConfig& c) { c.slack_weight = 0.0; });
  reject([](RunConfig& c) { c.eps_grid = 1; });

  RunConfig edge = ok;
  edge.alpha_exp = 1.0;
  edge.schedule.decay = 1.0;
  edge.iters = 0;
  CHECK_NOTHROW(dpd::init(inst, g, edge));
}

TEST_CASE("step size follows the diminishing schedule") {
  RunConfig cfg;
  cfg.alpha0 = 1.0;
  cfg.alpha_exp = 1.0;
  CHECK(dpd::step_size(0, cfg) == 1.0);
  CHECK(dpd::step_size(9, cfg) == doctest::Approx(0.1).epsilon(1e-14));
  cfg.alpha0 = 0.7;
  CHECK(dpd::step_size(0, cfg) == 0.7);
  cfg.alpha_exp = 0.8;
  CHECK(dpd::step_size(3, cfg) == doctest::Approx(0.7 / std::pow(4.0, 0.8)));
  CHECK_THROWS_AS(dpd::step_size(-1, cfg), std::invalid_argument);

  // Partial sums keep growing while the squared sums level off, the usual
  // divergent-step/convergent-energy pairing.
  for (double e : {1.0, 0.75}) {
    RunConfig s;
    s.alpha0 = 0.5;
    s.alpha_exp = e;
    double sum_lo = 0.0, sum_hi = 0.0, sq_lo = 0.0, sq_hi = 0.0;
    for (int t = 0; t < 10000; ++t) {
      const double a = dpd::step_size(t, s);
      (t < 1000 ? sum_lo : sum_hi) += a;
      (t < 1000 ? sq_lo : sq_hi) += a * a;
    }
    CHECK(sum_hi > 1.0);        // still adding whole units after round 1000
    CHECK(sq_hi < 0.05 * sq_lo);  // the energy tail is nearly spent
  }
}

TEST_CASE("allocation update applies published multiplier differences") {
  const Graph pair{2, {{0, 1}}};
  std::vector<AgentState> states(2);
  states[0].allocation = 3.0;
  states[1].allocation = 7.0;
  dpd::update_allocations(states, pair, 0.1, dpd::PublishedMultipliers({1.0, 0.0}));
  CHECK(states[0].allocation == 3.1);
  CHECK(states[1].allocation == 6.9);

  // Equal multipliers leave every allocation untouched, exactly.
  const Graph g = dpd::generate_erdos_renyi(6, 0.5, 21);
  std::vector<AgentState> flat(6);
  for (int i = 0; i < 6; ++i) flat[static_cast<std::size_t>(i)].allocation = 0.5 * i;
  dpd::update_allocations(flat, g, 0.3, dpd::PublishedMultipliers(std::vector<double>(6, 2.7)));
  for (int i = 0; i < 6; ++i) CHECK(flat[static_cast<std::size_t>(i)].allocation == 0.5 * i);

  std::vector<AgentState> wrong(4);
  CHECK_THROWS_AS(
      dpd::update_allocations(wrong, g, 0.1, dpd::PublishedMultipliers({0, 0, 0, 0})),
      std::invalid_argument);
}

TEST_CASE("allocation updates conserve the total and stay step-bounded") {
  dpd::SplitMix64 rng(4242);
  const double penalty = 50.0;
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 3 + static_cast<int>(rng.next() % 6);
    const Graph g = dpd::generate_erdos_renyi(n, 0.5, rng.next());
    const double alpha = rng.uniform(0.01, 0.5);
    std::vector<AgentState> states(static_cast<std::size_t>(n));
    std::vector<double> mu(static_cast<std::size_t>(n));
    double before = 0.0;
    for (int i = 0; i < n; ++i) {
      states[static_cast<std::size_t>(i)].allocation = rng.uniform(-5.0, 5.0);
      before += states[static_cast<std::size_t>(i)].allocation;
      mu[static_cast<std::size_t>(i)] = rng.uniform(0.0, penalty);
    }
    const std::vector<AgentState> frozen = states;
    dpd::update_allocations(states, g, alpha, dpd::PublishedMultipliers(mu));

    double after = 0.0;
    for (int i = 0; i < n; ++i) {
      const std::size_t si = static_cast<std::size_t>(i);
      after += states[si].allocation;
      const std::vector<int> nb = dpd::neighbors(g, i);
      double sum = 0.0;
      for (int j : nb) sum += mu[si] - mu[static_cast<std::size_t>(j)];
      CHECK(states[si].allocation == frozen[si].allocation + alpha * sum);
      CHECK(std::abs(states[si].allocation - frozen[si].allocation) <=
            alpha * static_cast<double>(nb.size()) * penalty * (1.0 + 1e-12));
    }
    CHECK(std::abs(after - before) <= 1e-12 * (1.0 + std::abs(before)));
  }
}

TEST_CASE("the update reads exactly the closed neighborhood") {
  const Graph path{5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}}};
  std::vector<AgentState> states(5);
  AuditBoard board({0.1, 0.2, 0.3, 0.4, 0.5});
  dpd::update_allocations(states, path, 0.2, board);
  for (int i = 0; i < 5; ++i) {
    std::set<int> expect{i};
    for (int j : dpd::neighbors(path, i)) expect.insert(j);
    CHECK(board.seen[static_cast<std::size_t>(i)] == expect);
  }

  const Graph star{4, {{0, 1}, {0, 2}, {0, 3}}};
  std::vector<AgentState> hub(4);
  AuditBoard wide({1.0, 2.0, 3.0, 4.0});
  dpd::update_allocations(hub, star, 0.2, wide);
  CHECK(wide.seen[0] == std::set<int>{0, 1, 2, 3});
  CHECK(wide.seen[1] == std::set<int>{0, 1});
  CHECK(wide.seen[2] == std::set<int>{0, 2});
  CHECK(wide.seen[3] == std::set<int>{0, 3});
}

TEST_CASE("rounds keep the trace invariants") {
  const ProblemInstance inst = small_instance(6, 2, 17);
  const Graph g = dpd::generate_erdos_renyi(6, 0.5, 17);
  RunConfig cfg = quick_config(25, 5);
  const Trace trace = dpd::run(inst, g, cfg);

  REQUIRE(trace.rows.size() == 25);
  CHECK(std::isfinite(trace.f_star));
  CHECK(trace.lambda_star >= 0.0);
  for (std::size_t t = 0; t < trace.rows.size(); ++t) {
    const TraceRow& row = trace.rows[t];
    CHECK(row.t == static_cast<int>(t));
    CHECK(row.alpha == dpd::step_size(static_cast<int>(t), cfg));
    CHECK(std::isfinite(row.cost_true));
    CHECK(std::isfinite(row.cost_relaxed_est));
    CHECK(row.cost_err_abs == std::abs(trace.f_star - row.cost_true));
    CHECK(row.coupling_violation >= 0.0);
    CHECK(row.alloc_residual <= 1e-9 * (1.0 + std::abs(inst.rhs)));
    CHECK(row.max_rho >= 0.0);
    CHECK(row.mu_min >= 0.0);
    CHECK(row.mu_min <= row.mu_max);
    CHECK(row.mu_max <= inst.penalty);
    CHECK(!row.has_eps);
    CHECK(row.eps_hat == 0.0);
  }
}

TEST_CASE("a zero-round run still reports the reference") {
  const ProblemInstance inst = small_instance(3, 1, 29);
  const Graph g = dpd::generate_erdos_renyi(3, 0.9, 29);
  const Trace trace = dpd::run(inst, g, quick_config(0, 1));
  CHECK(trace.rows.empty());
  CHECK(std::isfinite(trace.f_star));
}

TEST_CASE("one seed yields one trajectory") {
  const ProblemInstance inst = small_instance(5, 2, 31);
  const Graph g = dpd::generate_erdos_renyi(5, 0.5, 31);
  const RunConfig cfg = quick_config(12, 77);
  const Trace a = dpd::run(inst, g, cfg);
  const Trace b = dpd::run(inst, g, cfg);
  REQUIRE(a.rows.size() == b.rows.size());
  CHECK(same_bits(a.f_star, b.f_star));
  CHECK(same_bits(a.lambda_star, b.lambda_star));
  for (std::size_t t = 0; t < a.rows.size(); ++t) CHECK(same_row(a.rows[t], b.rows[t]));

  RunConfig other = cfg;
  other.seed = 78;
  const Trace c = dpd::run(inst, g, other);
  bool any_diff = false;
  for (std::size_t t = 0; t < a.rows.size(); ++t)
    if (!same_row(a.rows[t], c.rows[t])) any_diff = true;
  CHECK(any_diff);
}

TEST_CASE("the thread count never alters the trace") {
  const ProblemInstance inst = small_instance(5, 2, 41);
  const Graph g = dpd::generate_erdos_renyi(5, 0.5, 41);
  const RunConfig cfg = quick_config(15, 9);
  const Trace seq = dpd::run(inst, g, cfg, 1);
  for (int threads : {2, 4, 17}) {
    const Trace par = dpd::run(inst, g, cfg, threads);
    REQUIRE(par.rows.size() == seq.rows.size());
    for (std::size_t t = 0; t < seq.rows.size(); ++t) CHECK(same_row(seq.rows[t], par.rows[t]));
  }
}

TEST_CASE("a failing agent reports its id and the round index") {
  ProblemInstance inst = small_instance(3, 1, 53);
  inst.penalty = 0.0;  // every subproblem build rejects a non-positive penalty
  const Graph g = dpd::generate_erdos_renyi(3, 0.9, 53);
  const RunConfig cfg = quick_config(3, 2);
  std::vector<AgentState> states(3);
  for (AgentState& st : states) st.samples.capacity = cfg.k_max;

  for (int threads : {1, 3}) {
    try {
      dpd::round(4, states, inst, g, cfg, threads);
      FAIL("round accepted a non-positive penalty");
    } catch (const dpd::NumericalError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("agent 0") != std::string::npos);
      CHECK(msg.find("round 4") != std::string::npos);
    }
  }

  std::vector<AgentState> wrong(2);
  CHECK_THROWS_AS(dpd::round(0, wrong, inst, g, cfg), std::invalid_argument);
  std::vector<AgentState> ok(3);
  CHECK_THROWS_AS(dpd::round(-1, ok, inst, g, cfg), std::invalid_argument);
}

TEST_CASE("the epsilon diagnostic matches the certification oracle") {
  const ProblemInstance inst = small_instance(1, 1, 61);
  const Graph g1{1, {}};
  RunConfig cfg = quick_config(1, 13);
  cfg.eps_diag = true;
  cfg.eps_grid = 64;
  const Trace trace = dpd::run(inst, g1, cfg);
  REQUIRE(trace.rows.size() == 1);
  const TraceRow& row = trace.rows[0];
  CHECK(row.has_eps);
  CHECK(row.eps_hat >= 0.0);

  // One agent means the row's mu_min is that agent's multiplier and its
  // allocation at solve time is the full budget, so the diagnostic must
  // reproduce the reference certification on the same grid.
  const dpd::AgentProblem& ag = inst.agents[0];
  const dpd::YRange yr = dpd::y_range(ag.coupling_row, ag.box_lo, ag.box_hi);
  const auto p_eval = [&](double y) {
    return dpd::primal_value(dpd::make_true_subproblem(ag, y, inst.penalty));
  };
  const double expect =
      dpd::epsilon_estimate(p_eval, -row.mu_min, inst.rhs, yr, cfg.eps_grid);
  CHECK(row.eps_hat == doctest::Approx(expect).epsilon(1e-12));

  RunConfig multi = quick_config(4, 13);
  multi.eps_diag = true;
  multi.eps_grid = 32;
  const ProblemInstance wide = small_instance(3, 1, 67);
  const Graph g3 = dpd::generate_erdos_renyi(3, 0.9, 67);
  for (const TraceRow& r : dpd::run(wide, g3, multi).rows) {
    CHECK(r.has_eps);
    CHECK(r.eps_hat >= 0.0);
    CHECK(std::isfinite(r.eps_hat));
  }
}

TEST_CASE("sample memory respects capacity and the refit cadence") {
  const ProblemInstance inst = small_instance(2, 2, 71);
  const Graph g{2, {{0, 1}}};
  RunConfig cfg = quick_config(0, 19);
  cfg.k_max = 5;
  cfg.refit_every = 3;
  std::vector<AgentState> states = dpd::init(inst, g, cfg);

  std::size_t pieces_at_last_refit = 0;
  for (int t = 0; t < 9; ++t) {
    dpd::round(t, states, inst, g, cfg);
    for (const AgentState& st : states) {
      const std::size_t expect_n = std::min<std::size_t>(static_cast<std::size_t>(t) + 1, 5);
      CHECK(st.samples.samples.size() == expect_n);
      for (const dpd::Sample& s : st.samples.samples) {
        CHECK(s.birth_round <= t);
        CHECK(s.point.size() == 2);
      }
      CHECK(st.last_x.size() == 2);
      CHECK(st.last_mu >= 0.0);
      CHECK(st.last_mu <= inst.penalty);
      CHECK(st.last_rho >= 0.0);
    }
    if (t % cfg.refit_every == 0) pieces_at_last_refit = states[0].samples.samples.size();
    CHECK(states[0].estimate.pieces.size() == pieces_at_last_refit);
  }
}
