#pragma once

#include <limits>
#include <vector>

namespace dpd::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Dense linear program
//
//   minimize    objective . u
//   subject to  ineq_rows[k] . u <= ineq_rhs[k]
//               eq_rows[k]   . u == eq_rhs[k]
//               lower[j] <= u[j] <= upper[j]      (+-inf allowed)
struct Problem {
  std::vector<double> objective;
  std::vector<std::vector<double>> ineq_rows;
  std::vector<double> ineq_rhs;
  std::vector<std::vector<double>> eq_rows;
  std::vector<double> eq_rhs;
  std::vector<double> lower;
  std::vector<double> upper;

  Problem() = default;
  explicit Problem(int n_vars)
      : objective(n_vars, 0.0), lower(n_vars, -kInf), upper(n_vars, kInf) {}

  int n_vars() const { return static_cast<int>(objective.size()); }

  void add_ineq(std::vector<double> row, double rhs) {
    ineq_rows.push_back(std::move(row));
    ineq_rhs.push_back(rhs);
  }
  void add_eq(std::vector<double> row, double rhs) {
    eq_rows.push_back(std::move(row));
    eq_rhs.push_back(rhs);
  }
};

enum class Status { optimal, infeasible, unbounded };

// row_duals[k] is the sensitivity d(optimal value)/d(rhs_k), one entry per
// inequality row followed by one per equality row. Under the minimize /
// "rows . u <= rhs" convention inequality duals are <= 0; equality duals are
// free. objective_value is +inf for infeasible and -inf for unbounded
// problems, with primal/row_duals left empty.
struct Solution {
  Status status = Status::optimal;
  std::vector<double> primal;
  double objective_value = 0.0;
  std::vector<double> row_duals;
};

// Two-phase dense tableau simplex with Bland's entering/leaving rule.
// Deterministic: identical inputs produce identical outputs.
Solution solve(const Problem& p);

// Minimizes `secondary` over the optimal face of the primary objective by
// reoptimizing in the final first-stage basis, entering only columns whose
// first-stage reduced cost is at most tol (>= 0). The returned
// objective_value is the secondary objective's; primal and duals describe the
// tie-broken point, the duals certifying the first-stage optimum. Non-optimal
// first-stage statuses are returned unchanged.
Solution solve_lexicographic(const Problem& p, const std::vector<double>& secondary,
                             double tol);

}  // namespace dpd::lp
