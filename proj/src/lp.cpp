#include "dpd/lp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "dpd/errors.hpp"

namespace dpd::lp {
namespace {

constexpr double kPivotEps = 1e-9;  // pivot admissibility
constexpr double kFeasEps = 1e-7;   // feasibility classification, scaled by 1 + |rhs|_inf

void validate(const Problem& p) {
  const std::size_t n = p.objective.size();
  if (p.lower.size() != n || p.upper.size() != n)
    throw std::invalid_argument("lp: bounds size does not match variable count");
  if (p.ineq_rows.size() != p.ineq_rhs.size())
    throw std::invalid_argument("lp: inequality rows/rhs size mismatch");
  if (p.eq_rows.size() != p.eq_rhs.size())
    throw std::invalid_argument("lp: equality rows/rhs size mismatch");
  for (const auto& r : p.ineq_rows)
    if (r.size() != n) throw std::invalid_argument("lp: inequality row has wrong dimension");
  for (const auto& r : p.eq_rows)
    if (r.size() != n) throw std::invalid_argument("lp: equality row has wrong dimension");
  for (std::size_t j = 0; j < n; ++j) {
    if (!(p.lower[j] <= p.upper[j]))
      throw std::invalid_argument("lp: variable lower bound exceeds upper bound");
    if (p.lower[j] == kInf || p.upper[j] == -kInf)
      throw std::invalid_argument("lp: variable bounds leave empty domain");
  }
}

// Original variables are mapped onto nonnegative ones: shifted at a finite
// lower bound, mirrored at a finite upper bound (when only the upper bound is
// finite), or split into a difference of two nonnegative variables when free.
struct VarMap {
  enum Kind { kShiftLo, kMirrorHi, kSplitFree } kind = kShiftLo;
  int col = -1;
  int col_neg = -1;  // second column for split variables
  double base = 0.0;
};

// minimize cost . v + offset  s.t.  rows . v <= rhs,  v >= 0.
// Row order: original inequality rows, then each equality row as a (<=, >=)
// pair, then upper-bound rows for two-sided boxes.
struct StandardForm {
  int nv = 0;
  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;
  std::vector<double> cost;
  double offset = 0.0;
  std::vector<VarMap> vmap;
};

// Maps an objective over the original variables onto standard-form columns,
// accumulating the constant the shift/mirror transforms produce.
void map_cost(const std::vector<double>& c, const std::vector<VarMap>& vmap, int nv,
              std::vector<double>& cost, double& offset) {
  cost.assign(nv, 0.0);
  offset = 0.0;
  for (std::size_t j = 0; j < vmap.size(); ++j) {
    const double cj = c[j];
    if (cj == 0.0) continue;
    const VarMap& vm = vmap[j];
    switch (vm.kind) {
      case VarMap::kShiftLo:
        cost[vm.col] += cj;
        offset += cj * vm.base;
        break;
      case VarMap::kMirrorHi:
        cost[vm.col] -= cj;
        offset += cj * vm.base;
        break;
      case VarMap::kSplitFree:
        cost[vm.col] += cj;
        cost[vm.col_neg] -= cj;
        break;
    }
  }
}

StandardForm build(const Problem& p) {
  StandardForm sf;
  const int n = p.n_vars();
  sf.vmap.resize(n);
  for (int j = 0; j < n; ++j) {
    VarMap& vm = sf.vmap[j];
    if (p.lower[j] > -kInf) {
      vm.kind = VarMap::kShiftLo;
      vm.base = p.lower[j];
      vm.col = sf.nv++;
    } else if (p.upper[j] < kInf) {
      vm.kind = VarMap::kMirrorHi;
      vm.base = p.upper[j];
      vm.col = sf.nv++;
    } else {
      vm.kind = VarMap::kSplitFree;
      vm.col = sf.nv++;
      vm.col_neg = sf.nv++;
    }
  }

  auto add_row = [&sf, &p, n](const std::vector<double>& row, double rhs, double sign) {
    std::vector<double> out(sf.nv, 0.0);
    double r = sign * rhs;
    for (int j = 0; j < n; ++j) {
      const double a = sign * row[j];
      if (a == 0.0) continue;
      const VarMap& vm = sf.vmap[j];
      switch (vm.kind) {
        case VarMap::kShiftLo:
          out[vm.col] += a;
          r -= a * vm.base;
          break;
        case VarMap::kMirrorHi:
          out[vm.col] -= a;
          r -= a * vm.base;
          break;
        case VarMap::kSplitFree:
          out[vm.col] += a;
          out[vm.col_neg] -= a;
          break;
      }
    }
    sf.rows.push_back(std::move(out));
    sf.rhs.push_back(r);
  };

  for (std::size_t k = 0; k < p.ineq_rows.size(); ++k) add_row(p.ineq_rows[k], p.ineq_rhs[k], 1.0);
  for (std::size_t k = 0; k < p.eq_rows.size(); ++k) {
    add_row(p.eq_rows[k], p.eq_rhs[k], 1.0);
    add_row(p.eq_rows[k], p.eq_rhs[k], -1.0);
  }
  for (int j = 0; j < n; ++j) {
    const VarMap& vm = sf.vmap[j];
    if (vm.kind == VarMap::kShiftLo && p.upper[j] < kInf) {
      std::vector<double> out(sf.nv, 0.0);
      out[vm.col] = 1.0;
      sf.rows.push_back(std::move(out));
      sf.rhs.push_back(p.upper[j] - p.lower[j]);
    }
  }

  map_cost(p.objective, sf.vmap, sf.nv, sf.cost, sf.offset);
  return sf;
}

// Condensed dictionary tableau over the standard form. Row i < m_ encodes the
// basic variable bvar_[i] as
//     x_bvar[i] = d(i, nb_) - sum_j d(i, j) * x_nvar[j],
// row m_ holds phase-2 reduced costs with d(m_, nb_) = -objective, and row
// m_+1 the phase-1 objective (minimize the single artificial variable x0,
// which has coefficient -1 in every constraint row). Variable ids: structural
// 0..nv-1, slacks nv..nv+m-1, x0 = nv+m. Bland's rule picks the smallest
// eligible variable id, which makes every solve deterministic.
class Tableau {
 public:
  explicit Tableau(const StandardForm& sf)
      : m_(static_cast<int>(sf.rows.size())),
        nv_(sf.nv),
        nb_(sf.nv + 1),
        width_(nb_ + 1),
        x0_id_(sf.nv + m_),
        d_(static_cast<std::size_t>(m_ + 2) * width_, 0.0),
        bvar_(m_),
        nvar_(nb_) {
    for (int j = 0; j < nv_; ++j) nvar_[j] = j;
    nvar_[nb_ - 1] = x0_id_;
    rhs_scale_ = 0.0;
    for (int i = 0; i < m_; ++i) {
      bvar_[i] = nv_ + i;
      double* r = row(i);
      for (int j = 0; j < nv_; ++j) r[j] = sf.rows[i][j];
      r[nb_ - 1] = -1.0;
      r[nb_] = sf.rhs[i];
      rhs_scale_ = std::max(rhs_scale_, std::abs(sf.rhs[i]));
    }
    double* obj = row(m_);
    for (int j = 0; j < nv_; ++j) obj[j] = sf.cost[j];
    row(m_ + 1)[nb_ - 1] = 1.0;
    pivot_cap_ = 50 * (m_ + nb_);
  }

  Status optimize() {
    int worst_row = -1;
    double worst = -kPivotEps;
    for (int i = 0; i < m_; ++i)
      if (row(i)[nb_] < worst) {
        worst = row(i)[nb_];
        worst_row = i;
      }
    if (worst_row >= 0) {
      pivot(worst_row, nb_ - 1);
      if (bland(m_ + 1) != Status::optimal)
        throw NumericalError("lp: phase 1 did not terminate at an optimum");
      const double z1 = -row(m_ + 1)[nb_];
      if (z1 > kFeasEps * (1.0 + rhs_scale_)) return Status::infeasible;
      for (int i = 0; i < m_; ++i) {
        if (bvar_[i] != x0_id_) continue;
        int s = -1;
        for (int j = 0; j < nb_; ++j)
          if (nvar_[j] != x0_id_ && std::abs(row(i)[j]) > kPivotEps &&
              (s < 0 || nvar_[j] < nvar_[s]))
            s = j;
        if (s >= 0) pivot(i, s);
        // Otherwise the row is inert (all coefficients below the pivot
        // tolerance at value 0) and can stay basic without effect.
        break;
      }
    }
    for (int j = 0; j < nb_; ++j)
      if (nvar_[j] == x0_id_) dead_col_ = j;
    return bland(m_);
  }

  double objective() const { return -row_const(m_)[nb_]; }

  // Installs cost2 (standard-form coordinates) in the spare row and
  // reoptimizes it over the face where the first objective stays optimal:
  // only columns whose first-stage reduced cost is at most face_tol may
  // enter. Entering such a column changes the first-stage row by at most
  // face_tol per pivot, so it remains a valid optimality certificate and
  // slack_reduced_costs still reports first-stage duals afterwards. Requires
  // a prior optimize() that returned optimal.
  Status lex_reoptimize(const std::vector<double>& cost2, double face_tol) {
    double* o2 = row(m_ + 1);
    for (int j = 0; j <= nb_; ++j) o2[j] = 0.0;
    for (int j = 0; j < nb_; ++j) {
      const int id = nvar_[j];
      if (id < nv_) o2[j] = cost2[id];
    }
    for (int i = 0; i < m_; ++i) {
      const int id = bvar_[i];
      if (id >= nv_) continue;
      const double c = cost2[id];
      if (c == 0.0) continue;
      const double* ri = row_const(i);
      for (int j = 0; j <= nb_; ++j) o2[j] -= c * ri[j];
    }
    return bland(m_ + 1, face_tol);
  }

  double secondary_objective() const { return -row_const(m_ + 1)[nb_]; }

  // Values of basic structural variables; nonbasic ones are 0.
  void structural_values(std::vector<double>& v) const {
    for (int i = 0; i < m_; ++i)
      if (bvar_[i] < nv_) v[bvar_[i]] = row_const(i)[nb_];
  }

  // Reduced cost of each slack variable at the final basis (0 when basic).
  void slack_reduced_costs(std::vector<double>& lam) const {
    const double* obj = row_const(m_);
    for (int j = 0; j < nb_; ++j) {
      const int id = nvar_[j];
      if (id >= nv_ && id < x0_id_) lam[id - nv_] = obj[j];
    }
  }

 private:
  double* row(int i) { return d_.data() + static_cast<std::size_t>(i) * width_; }
  const double* row_const(int i) const {
    return d_.data() + static_cast<std::size_t>(i) * width_;
  }

  void pivot(int r, int s) {
    double* pr = row(r);
    const double inv = 1.0 / pr[s];
    for (int j = 0; j <= nb_; ++j) pr[j] *= inv;
    pr[s] = inv;
    for (int i = 0; i < m_ + 2; ++i) {
      if (i == r) continue;
      double* ri = row(i);
      const double f = ri[s];
      if (f == 0.0) continue;
      for (int j = 0; j <= nb_; ++j) ri[j] -= f * pr[j];
      ri[s] = -f * inv;
    }
    std::swap(bvar_[r], nvar_[s]);
  }

  // face_tol >= 0 restricts entering columns to those whose first-stage
  // reduced cost (row m_) is at most face_tol; negative disables the filter.
  Status bland(int obj_row, double face_tol = -1.0) {
    for (;;) {
      if (++pivots_ > pivot_cap_) throw NumericalError("lp: pivot cap exceeded");
      const double* obj = row_const(obj_row);
      const double* rc1 = row_const(m_);
      int s = -1;
      for (int j = 0; j < nb_; ++j) {
        if (j == dead_col_) continue;
        if (face_tol >= 0.0 && rc1[j] > face_tol) continue;
        if (obj[j] < -kPivotEps && (s < 0 || nvar_[j] < nvar_[s])) s = j;
      }
      if (s < 0) return Status::optimal;
      int r = -1;
      double best = 0.0;
      for (int i = 0; i < m_; ++i) {
        const double a = row_const(i)[s];
        if (a <= kPivotEps) continue;
        const double ratio = row_const(i)[nb_] / a;
        if (r < 0 || ratio < best || (ratio == best && bvar_[i] < bvar_[r])) {
          r = i;
          best = ratio;
        }
      }
      if (r < 0) return Status::unbounded;
      pivot(r, s);
    }
  }

  int m_, nv_, nb_, width_, x0_id_;
  std::vector<double> d_;
  std::vector<int> bvar_, nvar_;
  double rhs_scale_ = 0.0;
  int dead_col_ = -1;
  long pivots_ = 0;
  long pivot_cap_ = 0;
};

// Fills primal values and row duals from the final dictionary. Sensitivity
// duals: for a <= row the optimal-value derivative with respect to its rhs is
// minus the reduced cost of its slack; an equality row is the (<=, >=) pair,
// so its derivative combines both members.
void extract(const Problem& p, const StandardForm& sf, const Tableau& tab,
             double objective_value, Solution& sol) {
  std::vector<double> v(sf.nv, 0.0);
  tab.structural_values(v);
  const int n = p.n_vars();
  sol.primal.resize(n);
  for (int j = 0; j < n; ++j) {
    const VarMap& vm = sf.vmap[j];
    switch (vm.kind) {
      case VarMap::kShiftLo:
        sol.primal[j] = vm.base + v[vm.col];
        break;
      case VarMap::kMirrorHi:
        sol.primal[j] = vm.base - v[vm.col];
        break;
      case VarMap::kSplitFree:
        sol.primal[j] = v[vm.col] - v[vm.col_neg];
        break;
    }
  }
  sol.objective_value = objective_value;

  std::vector<double> lam(sf.rows.size(), 0.0);
  tab.slack_reduced_costs(lam);
  const int ni = static_cast<int>(p.ineq_rows.size());
  const int ne = static_cast<int>(p.eq_rows.size());
  sol.row_duals.resize(ni + ne);
  for (int k = 0; k < ni; ++k) sol.row_duals[k] = -lam[k];
  for (int k = 0; k < ne; ++k)
    sol.row_duals[ni + k] = lam[ni + 2 * k + 1] - lam[ni + 2 * k];
}

}  // namespace

Solution solve(const Problem& p) {
  validate(p);
  const StandardForm sf = build(p);
  Tableau tab(sf);
  Solution sol;
  sol.status = tab.optimize();
  if (sol.status == Status::infeasible) {
    sol.objective_value = kInf;
    return sol;
  }
  if (sol.status == Status::unbounded) {
    sol.objective_value = -kInf;
    return sol;
  }
  extract(p, sf, tab, tab.objective() + sf.offset, sol);
  return sol;
}

Solution solve_lexicographic(const Problem& p, const std::vector<double>& secondary,
                             double tol) {
  if (tol < 0.0) throw std::invalid_argument("lp: lexicographic tolerance must be >= 0");
  if (secondary.size() != p.objective.size())
    throw std::invalid_argument("lp: secondary objective has wrong dimension");
  validate(p);
  const StandardForm sf = build(p);
  Tableau tab(sf);
  Solution sol;
  sol.status = tab.optimize();
  if (sol.status == Status::infeasible) {
    sol.objective_value = kInf;
    return sol;
  }
  if (sol.status == Status::unbounded) {
    sol.objective_value = -kInf;
    return sol;
  }

  // Second stage walks the tol-optimal face of the first objective, so the
  // pivots stay on real face geometry instead of an appended near-optimality
  // row whose entries vanish near dual kinks. The reported objective_value is
  // the secondary one; the duals certify the first-stage optimum.
  std::vector<double> cost2;
  double offset2 = 0.0;
  map_cost(secondary, sf.vmap, sf.nv, cost2, offset2);
  sol.status = tab.lex_reoptimize(cost2, tol);
  if (sol.status == Status::unbounded) {
    sol.objective_value = -kInf;
    return sol;
  }
  extract(p, sf, tab, tab.secondary_objective() + offset2, sol);
  return sol;
}

}  // namespace dpd::lp
