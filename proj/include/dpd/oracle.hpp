#pragma once

#include <vector>

#include "dpd/problem.hpp"
#include "dpd/rng.hpp"

namespace dpd {

struct Sample {
  std::vector<double> point;
  double value = 0.0;
  int birth_round = 0;
};

struct SampleSet {
  std::vector<Sample> samples;
  int capacity = 30;
};

// One affine piece anchored at a sample: x -> anchor_value + slope.(x - anchor_point).
struct MaxAffinePiece {
  std::vector<double> slope;
  std::vector<double> anchor_point;
  double anchor_value = 0.0;
};

// Convex piecewise-affine underestimator-style surrogate: the pointwise max
// of its pieces. fit_slack is the total constraint slack the fit needed;
// zero slack means the surrogate interpolates every anchor.
struct MaxAffineEstimate {
  std::vector<MaxAffinePiece> pieces;
  double fit_slack = 0.0;
};

// Shrinking-ball sampling schedule: rounds before free_rounds sample the
// whole box; later rounds sample a ball of radius
// max(r_min, r0 * decay^(round - free_rounds)) around the current iterate.
struct SamplingSchedule {
  int free_rounds = 50;
  double r0 = 2.0;
  double r_min = 0.05;
  double decay = 0.99;
};

double sampling_radius(int round, const SamplingSchedule& schedule);

// Draws one sample and evaluates the true cost at it. current_iterate may be
// null during the free rounds and must be non-null afterwards. Ball draws are
// rejection-sampled against the box; after 100 rejections the draw is clamped
// to the box instead (the clamp cannot increase the distance to the center,
// so the radius bound survives it).
Sample draw_sample(const AgentProblem& agent, const std::vector<double>* current_iterate,
                   int round, const SamplingSchedule& schedule, SplitMix64& rng);

// Fits one affine piece per sample by linear programming: minimize the l1
// norm of all slopes plus slack_weight times the total violation of the
// pairwise consistency constraints
//   value_h + slope_h.(z_l - z_h) <= value_l + xi_hl,   xi_hl >= 0.
// Each piece's constraints touch only that piece's variables, so the fit
// solves one small LP per piece; the union is exactly the joint problem.
MaxAffineEstimate fit_max_affine(const SampleSet& samples, double slack_weight);

double eval_estimate(const MaxAffineEstimate& est, const std::vector<double>& x);

// Shrinks the set to its capacity by repeatedly dropping, from the oldest
// half (by birth round), the sample farthest from current_iterate. Survivor
// order is preserved.
SampleSet prune(const SampleSet& samples, const std::vector<double>& current_iterate);

}  // namespace dpd
