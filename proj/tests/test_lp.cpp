#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <vector>

#include "dpd/errors.hpp"
#include "dpd/lp.hpp"
#include "dpd/rng.hpp"
#include "support/vertex_oracle.hpp"

using dpd::lp::kInf;
using dpd::lp::Problem;
using dpd::lp::Solution;
using dpd::lp::Status;

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// KKT audit of an optimal solution: primal feasibility, dual sign, complementary
// slackness, and a duality gap computed from the Lagrangian dual value at the
// reported multipliers. All variables must have finite boxes for the dual value
// to be finite.
void check_certificates(const Problem& p, const Solution& s) {
  REQUIRE(s.status == Status::optimal);
  const std::size_t n = p.objective.size();
  const std::size_t ni = p.ineq_rows.size();
  const std::size_t ne = p.eq_rows.size();
  REQUIRE(s.primal.size() == n);
  REQUIRE(s.row_duals.size() == ni + ne);

  double hmax = 0.0;
  for (double h : p.ineq_rhs) hmax = std::max(hmax, std::abs(h));
  for (double e : p.eq_rhs) hmax = std::max(hmax, std::abs(e));
  const double feas_tol = 1e-7 * (1.0 + hmax);

  for (std::size_t j = 0; j < n; ++j) {
    CHECK(s.primal[j] >= p.lower[j] - feas_tol);
    CHECK(s.primal[j] <= p.upper[j] + feas_tol);
  }
  for (std::size_t k = 0; k < ni; ++k) {
    const double slack = p.ineq_rhs[k] - dot(p.ineq_rows[k], s.primal);
    CHECK(slack >= -feas_tol);
    CHECK(s.row_duals[k] <= 1e-9);
    CHECK(std::abs(s.row_duals[k] * slack) <= feas_tol * (1.0 + std::abs(s.row_duals[k])));
  }
  for (std::size_t k = 0; k < ne; ++k)
    CHECK(std::abs(dot(p.eq_rows[k], s.primal) - p.eq_rhs[k]) <= feas_tol);

  // Lagrangian dual value at multipliers mu = -dual (>= 0) for inequalities and
  // nu = -dual for equalities: g = -mu.h - nu.e + sum_j min over the box of
  // (c + A'mu + E'nu)_j x_j.
  std::vector<double> red = p.objective;
  double g = 0.0;
  for (std::size_t k = 0; k < ni; ++k) {
    const double mu = -s.row_duals[k];
    g -= mu * p.ineq_rhs[k];
    for (std::size_t j = 0; j < n; ++j) red[j] += mu * p.ineq_rows[k][j];
  }
  for (std::size_t k = 0; k < ne; ++k) {
    const double nu = -s.row_duals[ni + k];
    g -= nu * p.eq_rhs[k];
    for (std::size_t j = 0; j < n; ++j) red[j] += nu * p.eq_rows[k][j];
  }
  for (std::size_t j = 0; j < n; ++j) {
    REQUIRE(p.lower[j] > -kInf);
    REQUIRE(p.upper[j] < kInf);
    g += red[j] >= 0.0 ? red[j] * p.lower[j] : red[j] * p.upper[j];
  }
  CHECK(std::abs(g - s.objective_value) <= 1e-7 * (1.0 + std::abs(s.objective_value)));
}

}  // namespace

TEST_CASE("single active constraint pins the optimum and its dual") {
  Problem p(1);
  p.objective = {1.0};
  p.add_ineq({-1.0}, -1.0);  // u >= 1
  const Solution s = dpd::lp::solve(p);
  REQUIRE(s.status == Status::optimal);
  CHECK(s.primal[0] == doctest::Approx(1.0));
  CHECK(s.objective_value == doctest::Approx(1.0));
  // Raising the rhs h of -u <= h moves the optimum to -h, so dv/dh = -1.
  CHECK(s.row_duals[0] == doctest::Approx(-1.0));
}

TEST_CASE("empty feasible set is reported infeasible") {
  Problem p(1);
  p.objective = {1.0};
  p.lower[0] = 0.0;
  p.add_ineq({1.0}, -1.0);  // u <= -1 against u >= 0
  const Solution s = dpd::lp::solve(p);
  CHECK(s.status == Status::infeasible);
  CHECK(s.objective_value == kInf);
}

TEST_CASE("descent ray is reported unbounded") {
  Problem p(1);
  p.objective = {-1.0};
  p.lower[0] = 0.0;  // no upper bound
  const Solution s = dpd::lp::solve(p);
  CHECK(s.status == Status::unbounded);
  CHECK(s.objective_value == -kInf);
}

TEST_CASE("upper-bound-only variable is handled by mirroring") {
  Problem p(1);
  p.objective = {-1.0};
  p.upper[0] = 2.0;  // no lower bound
  const Solution s = dpd::lp::solve(p);
  REQUIRE(s.status == Status::optimal);
  CHECK(s.primal[0] == doctest::Approx(2.0));
  CHECK(s.objective_value == doctest::Approx(-2.0));
}

TEST_CASE("free variable constrained only by rows") {
  Problem p(1);
  p.objective = {1.0};
  p.add_ineq({1.0}, 5.0);
  p.add_ineq({-1.0}, 3.0);  // u >= -3
  const Solution s = dpd::lp::solve(p);
  REQUIRE(s.status == Status::optimal);
  CHECK(s.primal[0] == doctest::Approx(-3.0));
  CHECK(s.objective_value == doctest::Approx(-3.0));
  CHECK(s.row_duals[0] == doctest::Approx(0.0));
  CHECK(s.row_duals[1] == doctest::Approx(-1.0));
}

TEST_CASE("equality row dual carries the value sensitivity") {
  Problem p(2);
  p.objective = {1.0, 2.0};
  p.lower = {0.0, 0.0};
  p.upper = {1.0, 1.0};
  p.add_eq({1.0, 1.0}, 1.0);
  const Solution s = dpd::lp::solve(p);
  REQUIRE(s.status == Status::optimal);
  CHECK(s.primal[0] == doctest::Approx(1.0));
  CHECK(s.primal[1] == doctest::Approx(0.0));
  CHECK(s.objective_value == doctest::Approx(1.0));
  // Near e = 1 the optimum is x = (e, 0) with value e, so dv/de = 1.
  CHECK(s.row_duals[0] == doctest::Approx(1.0));
  check_certificates(p, s);
}

TEST_CASE("zero rows are classified by their rhs sign") {
  Problem p(2);
  p.objective = {1.0, 1.0};
  p.lower = {0.0, 0.0};
  p.upper = {1.0, 1.0};
  p.add_ineq({0.0, 0.0}, 1.0);  // vacuous
  SUBCASE("vacuous row changes nothing") {
    const Solution s = dpd::lp::solve(p);
    REQUIRE(s.status == Status::optimal);
    CHECK(s.objective_value == doctest::Approx(0.0));
  }
  SUBCASE("contradictory zero row is infeasible") {
    p.add_ineq({0.0, 0.0}, -1.0);
    CHECK(dpd::lp::solve(p).status == Status::infeasible);
  }
}

TEST_CASE("pinned variable via equal bounds") {
  Problem p(2);
  p.objective = {1.0, 1.0};
  p.lower = {2.0, 0.0};
  p.upper = {2.0, 1.0};
  const Solution s = dpd::lp::solve(p);
  REQUIRE(s.status == Status::optimal);
  CHECK(s.primal[0] == doctest::Approx(2.0));
  CHECK(s.objective_value == doctest::Approx(2.0));
}

TEST_CASE("malformed problems are rejected") {
  Problem p(2);
  SUBCASE("objective dimension") {
    p.objective = {1.0};
    CHECK_THROWS_AS(dpd::lp::solve(p), std::invalid_argument);
  }
  SUBCASE("row dimension") {
    p.ineq_rows.push_back({1.0});
    p.ineq_rhs.push_back(0.0);
    CHECK_THROWS_AS(dpd::lp::solve(p), std::invalid_argument);
  }
  SUBCASE("rows and rhs out of step") {
    p.ineq_rows.push_back({1.0, 0.0});
    CHECK_THROWS_AS(dpd::lp::solve(p), std::invalid_argument);
  }
  SUBCASE("crossed bounds") {
    p.lower[0] = 1.0;
    p.upper[0] = 0.0;
    CHECK_THROWS_AS(dpd::lp::solve(p), std::invalid_argument);
  }
  SUBCASE("negative lexicographic tolerance") {
    CHECK_THROWS_AS(dpd::lp::solve_lexicographic(p, {0.0, 0.0}, -1.0),
                    std::invalid_argument);
  }
  SUBCASE("secondary objective dimension") {
    CHECK_THROWS_AS(dpd::lp::solve_lexicographic(p, {0.0}, 0.0),
                    std::invalid_argument);
  }
}

TEST_CASE("lexicographic solve with a vacuous primary objective") {
  Problem p(1);
  p.objective = {0.0};
  p.lower[0] = 0.0;
  p.upper[0] = 1.0;
  SUBCASE("secondary +u picks the left endpoint") {
    const Solution s = dpd::lp::solve_lexicographic(p, {1.0}, 1e-9);
    REQUIRE(s.status == Status::optimal);
    CHECK(s.primal[0] == doctest::Approx(0.0));
    CHECK(s.objective_value == doctest::Approx(0.0));
  }
  SUBCASE("secondary -u picks the right endpoint") {
    const Solution s = dpd::lp::solve_lexicographic(p, {-1.0}, 1e-9);
    REQUIRE(s.status == Status::optimal);
    CHECK(s.primal[0] == doctest::Approx(1.0));
  }
}

TEST_CASE("lexicographic solve keeps non-optimal statuses") {
  Problem p(1);
  p.objective = {1.0};
  p.lower[0] = 0.0;
  p.add_ineq({1.0}, -1.0);
  const Solution s = dpd::lp::solve_lexicographic(p, {1.0}, 1e-9);
  CHECK(s.status == Status::infeasible);
}

// Epigraph of max(-x, 0, x-1): flat optimal face [0, 1] at value 0. A grid scan
// pins the face; the lexicographic solve must land on the chosen end of it.
TEST_CASE("lexicographic tie-break over a flat epigraph face") {
  Problem p(2);  // variables (x, t)
  p.objective = {0.0, 1.0};
  p.lower = {-2.0, -kInf};
  p.upper = {3.0, kInf};
  p.add_ineq({-1.0, -1.0}, 0.0);  // -x <= t
  p.add_ineq({0.0, -1.0}, 0.0);   //  0 <= t
  p.add_ineq({1.0, -1.0}, 1.0);   //  x - 1 <= t

  // Reference: scan the grid for the minimum of the max-affine function and
  // collect the argmin face.
  double fmin = kInf;
  for (int k = 0; k <= 5000; ++k) {
    const double x = -2.0 + 5.0 * k / 5000.0;
    fmin = std::min(fmin, std::max({-x, 0.0, x - 1.0}));
  }
  double face_lo = kInf, face_hi = -kInf;
  for (int k = 0; k <= 5000; ++k) {
    const double x = -2.0 + 5.0 * k / 5000.0;
    if (std::max({-x, 0.0, x - 1.0}) <= fmin + 1e-12) {
      face_lo = std::min(face_lo, x);
      face_hi = std::max(face_hi, x);
    }
  }
  CHECK(fmin == doctest::Approx(0.0));
  CHECK(face_lo == doctest::Approx(0.0));
  CHECK(face_hi == doctest::Approx(1.0));

  SUBCASE("secondary +x lands on the low end") {
    const Solution s = dpd::lp::solve_lexicographic(p, {1.0, 0.0}, 1e-9);
    REQUIRE(s.status == Status::optimal);
    CHECK(s.primal[0] == doctest::Approx(face_lo).epsilon(1e-6));
  }
  SUBCASE("secondary -x lands on the high end") {
    const Solution s = dpd::lp::solve_lexicographic(p, {-1.0, 0.0}, 1e-9);
    REQUIRE(s.status == Status::optimal);
    CHECK(s.primal[0] == doctest::Approx(face_hi).epsilon(1e-6));
  }
}

TEST_CASE("random box instances agree with vertex enumeration") {
  dpd::SplitMix64 rng(0x5eedbeefULL);
  int optimal_seen = 0, infeasible_seen = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    Problem p(4);
    for (int j = 0; j < 4; ++j) {
      p.objective[j] = rng.uniform(-1.0, 1.0);
      p.lower[j] = -2.0;
      p.upper[j] = 2.0;
    }
    for (int k = 0; k < 6; ++k) {
      std::vector<double> row(4);
      for (auto& a : row) a = rng.uniform(-1.0, 1.0);
      p.add_ineq(row, rng.uniform(-1.0, 2.0));
    }
    const auto ref = testsupport::solve_by_vertex_enumeration(p);
    const Solution s = dpd::lp::solve(p);
    if (ref.feasible) {
      REQUIRE(s.status == Status::optimal);
      CHECK(std::abs(s.objective_value - ref.value) <= 1e-6);
      check_certificates(p, s);
      ++optimal_seen;
    } else {
      CHECK(s.status == Status::infeasible);
      ++infeasible_seen;
    }
    if (trial % 50 == 0) {
      // Determinism: a second solve of the same bits reproduces the first one
      // exactly.
      const Solution again = dpd::lp::solve(p);
      REQUIRE(again.status == s.status);
      if (s.status == Status::optimal) {
        CHECK(std::memcmp(again.primal.data(), s.primal.data(),
                          s.primal.size() * sizeof(double)) == 0);
        CHECK(std::memcmp(again.row_duals.data(), s.row_duals.data(),
                          s.row_duals.size() * sizeof(double)) == 0);
        CHECK(again.objective_value == s.objective_value);
      }
    }
  }
  // The generator must exercise both classifications, otherwise the test says
  // less than it appears to.
  CHECK(optimal_seen > 100);
  CHECK(infeasible_seen > 100);
}

TEST_CASE("random instances with an equality row agree with vertex enumeration") {
  dpd::SplitMix64 rng(0xabcdef01ULL);
  int optimal_seen = 0;
  for (int trial = 0; trial < 300; ++trial) {
    Problem p(4);
    std::vector<double> interior(4);
    for (int j = 0; j < 4; ++j) {
      p.objective[j] = rng.uniform(-1.0, 1.0);
      p.lower[j] = -2.0;
      p.upper[j] = 2.0;
      interior[j] = rng.uniform(-1.5, 1.5);
    }
    for (int k = 0; k < 3; ++k) {
      std::vector<double> row(4);
      for (auto& a : row) a = rng.uniform(-1.0, 1.0);
      p.add_ineq(row, rng.uniform(-0.5, 2.0));
    }
    std::vector<double> erow(4);
    for (auto& a : erow) a = rng.uniform(-1.0, 1.0);
    // Pass the hyperplane through a point of the box so the equality row is
    // satisfiable on its own.
    p.add_eq(erow, dot(erow, interior));
    const auto ref = testsupport::solve_by_vertex_enumeration(p);
    const Solution s = dpd::lp::solve(p);
    if (ref.feasible) {
      REQUIRE(s.status == Status::optimal);
      CHECK(std::abs(s.objective_value - ref.value) <= 1e-6);
      check_certificates(p, s);
      ++optimal_seen;
    } else {
      CHECK(s.status == Status::infeasible);
    }
  }
  CHECK(optimal_seen > 50);
}
