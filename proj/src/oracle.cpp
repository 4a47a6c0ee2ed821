#include "dpd/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "dpd/errors.hpp"
#include "dpd/lp.hpp"

namespace dpd {
namespace {

double normal_draw(SplitMix64& rng) {
  const double u1 = 1.0 - rng.next_double();  // (0, 1], keeps the log finite
  const double u2 = rng.next_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Uniform draw from the ball of radius r around center: gaussian direction,
// radius scaled by U^(1/n).
std::vector<double> ball_draw(const std::vector<double>& center, double r,
                              SplitMix64& rng) {
  const std::size_t n = center.size();
  std::vector<double> dir(n);
  double norm2 = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    dir[j] = normal_draw(rng);
    norm2 += dir[j] * dir[j];
  }
  std::vector<double> point(center);
  if (norm2 <= 0.0) return point;  // degenerate gaussian draw: stay at the center
  const double scale =
      r * std::pow(rng.next_double(), 1.0 / static_cast<double>(n)) / std::sqrt(norm2);
  for (std::size_t j = 0; j < n; ++j) point[j] += dir[j] * scale;
  return point;
}

bool in_box(const AgentProblem& agent, const std::vector<double>& x) {
  for (int j = 0; j < agent.dim; ++j)
    if (x[j] < agent.box_lo[j] || x[j] > agent.box_hi[j]) return false;
  return true;
}

}  // namespace

double sampling_radius(int round, const SamplingSchedule& schedule) {
  const int past = round - schedule.free_rounds;
  if (past < 0) return schedule.r0;
  return std::max(schedule.r_min, schedule.r0 * std::pow(schedule.decay, past));
}

Sample draw_sample(const AgentProblem& agent, const std::vector<double>* current_iterate,
                   int round, const SamplingSchedule& schedule, SplitMix64& rng) {
  Sample s;
  s.birth_round = round;
  if (round < schedule.free_rounds) {
    s.point.resize(agent.dim);
    for (int j = 0; j < agent.dim; ++j)
      s.point[j] = rng.uniform(agent.box_lo[j], agent.box_hi[j]);
  } else {
    if (current_iterate == nullptr)
      throw std::invalid_argument("oracle: ball sampling needs a current iterate");
    if (current_iterate->size() != static_cast<std::size_t>(agent.dim))
      throw std::invalid_argument("oracle: current iterate dimension mismatch");
    const double r = sampling_radius(round, schedule);
    bool accepted = false;
    for (int attempt = 0; attempt < 100 && !accepted; ++attempt) {
      s.point = ball_draw(*current_iterate, r, rng);
      accepted = in_box(agent, s.point);
    }
    if (!accepted) {
      s.point = ball_draw(*current_iterate, r, rng);
      for (int j = 0; j < agent.dim; ++j)
        s.point[j] = std::clamp(s.point[j], agent.box_lo[j], agent.box_hi[j]);
    }
  }
  s.value = eval_true(agent, s.point);
  return s;
}

MaxAffineEstimate fit_max_affine(const SampleSet& samples, double slack_weight) {
  const std::size_t K = samples.samples.size();
  if (K < 1) throw std::invalid_argument("oracle: fit needs at least one sample");
  if (!(slack_weight > 0.0)) throw std::invalid_argument("oracle: slack_weight must be > 0");
  const std::size_t n = samples.samples[0].point.size();
  for (const Sample& s : samples.samples)
    if (s.point.size() != n) throw std::invalid_argument("oracle: mixed sample dimensions");

  MaxAffineEstimate est;
  est.pieces.reserve(K);
  for (std::size_t h = 0; h < K; ++h) {
    // Variables: slope positive part (n), negative part (n), one slack per
    // other sample (K-1). Everything nonnegative; costs 1 on the slope parts
    // and slack_weight on the slacks.
    const std::size_t nv = 2 * n + (K - 1);
    lp::Problem p(static_cast<int>(nv));
    for (std::size_t j = 0; j < nv; ++j) {
      p.lower[j] = 0.0;
      p.objective[j] = j < 2 * n ? 1.0 : slack_weight;
    }
    const Sample& sh = samples.samples[h];
    std::size_t slack_col = 2 * n;
    for (std::size_t l = 0; l < K; ++l) {
      if (l == h) continue;
      const Sample& sl = samples.samples[l];
      std::vector<double> row(nv, 0.0);
      for (std::size_t j = 0; j < n; ++j) {
        const double d = sl.point[j] - sh.point[j];
        row[j] = d;
        row[n + j] = -d;
      }
      row[slack_col++] = -1.0;
      p.add_ineq(row, sl.value - sh.value);
    }
    const lp::Solution sol = lp::solve(p);
    if (sol.status != lp::Status::optimal)
      throw NumericalError("oracle: slope fit LP did not solve");
    MaxAffinePiece piece;
    piece.anchor_point = sh.point;
    piece.anchor_value = sh.value;
    piece.slope.resize(n);
    for (std::size_t j = 0; j < n; ++j)
      piece.slope[j] = sol.primal[j] - sol.primal[n + j];
    for (std::size_t j = 2 * n; j < nv; ++j) est.fit_slack += sol.primal[j];
    est.pieces.push_back(std::move(piece));
  }
  return est;
}

double eval_estimate(const MaxAffineEstimate& est, const std::vector<double>& x) {
  if (est.pieces.empty()) throw std::invalid_argument("oracle: empty estimate");
  double best = -1e308;
  for (const MaxAffinePiece& piece : est.pieces) {
    if (piece.anchor_point.size() != x.size())
      throw std::invalid_argument("oracle: estimate dimension mismatch");
    double v = piece.anchor_value;
    for (std::size_t j = 0; j < x.size(); ++j)
      v += piece.slope[j] * (x[j] - piece.anchor_point[j]);
    best = std::max(best, v);
  }
  return best;
}

SampleSet prune(const SampleSet& samples, const std::vector<double>& current_iterate) {
  SampleSet out = samples;
  if (out.capacity < 1) throw std::invalid_argument("oracle: capacity must be >= 1");
  auto dist2 = [&current_iterate](const Sample& s) {
    if (s.point.size() != current_iterate.size())
      throw std::invalid_argument("oracle: iterate dimension mismatch in prune");
    double d = 0.0;
    for (std::size_t j = 0; j < s.point.size(); ++j) {
      const double t = s.point[j] - current_iterate[j];
      d += t * t;
    }
    return d;
  };
  while (out.samples.size() > static_cast<std::size_t>(out.capacity)) {
    // Indices of the oldest half (ceil) by birth round; stable on ties so the
    // earliest-inserted counts as oldest.
    std::vector<std::size_t> order(out.samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&out](std::size_t a, std::size_t b) {
      return out.samples[a].birth_round < out.samples[b].birth_round;
    });
    const std::size_t half = (order.size() + 1) / 2;
    std::size_t victim = order[0];
    double worst = dist2(out.samples[victim]);
    for (std::size_t k = 1; k < half; ++k) {
      const double d = dist2(out.samples[order[k]]);
      if (d > worst) {
        worst = d;
        victim = order[k];
      }
    }
    out.samples.erase(out.samples.begin() + static_cast<std::ptrdiff_t>(victim));
  }
  return out;
}

}  // namespace dpd
