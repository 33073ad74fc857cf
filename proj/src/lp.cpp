#include "scengen/lp.hpp"

#include <cmath>
#include <stdexcept>

namespace scengen::lp {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-9;
constexpr double kFeasTol = 1e-7;

// how each original variable maps onto nonnegative tableau columns
enum class VarKind { shifted, flipped, split };

struct VarMap {
  VarKind kind;
  int col = -1;    // primary column
  int col2 = -1;   // negative part for split variables
  double offset = 0.0;  // lb for shifted, ub for flipped
};

struct RowInfo {
  int orig = -1;       // original row index, -1 for internal bound rows
  double sign = 1.0;   // multiplier applied to reach nonnegative rhs
  int slack = -1;      // slack / surplus column
  int art = -1;        // artificial column
  bool deleted = false;
};

struct Tableau {
  Eigen::MatrixXd T;        // (m x (ncols + 1)), last column is the rhs
  std::vector<int> basis;   // basic column per row
  std::vector<RowInfo> rows;
  int ncols = 0;
  int art_begin = 0;  // artificial columns occupy [art_begin, ncols)
};

void pivot(Tableau& tb, int prow, int pcol) {
  Eigen::RowVectorXd row = tb.T.row(prow) / tb.T(prow, pcol);
  tb.T.row(prow) = row;
  for (int i = 0; i < tb.T.rows(); ++i) {
    if (i == prow) continue;
    const double f = tb.T(i, pcol);
    if (f != 0.0) tb.T.row(i) -= f * row;
  }
  tb.basis[prow] = pcol;
}

// min-ratio leaving row; ties broken by smallest basic column (Bland-safe)
int ratio_test(const Tableau& tb, int pcol) {
  const int m = static_cast<int>(tb.T.rows());
  const int rhs = tb.ncols;
  int best = -1;
  double best_ratio = 0.0;
  for (int i = 0; i < m; ++i) {
    if (tb.rows[i].deleted) continue;
    const double a = tb.T(i, pcol);
    if (a <= kPivotTol) continue;
    const double r = tb.T(i, rhs) / a;
    if (best < 0 || r < best_ratio - 1e-12 ||
        (r < best_ratio + 1e-12 && tb.basis[i] < tb.basis[best])) {
      best = i;
      best_ratio = r;
    }
  }
  return best;
}

// returns optimal=converged, unbounded, or iteration_limit
Status run_simplex(Tableau& tb, Eigen::RowVectorXd& z, const std::vector<bool>& allowed,
                   long max_iter) {
  const int rhs = tb.ncols;
  long stall = 0;
  bool bland = false;
  double last_obj = z[rhs];
  for (long it = 0; it < max_iter; ++it) {
    int pcol = -1;
    if (bland) {
      for (int j = 0; j < tb.ncols; ++j)
        if (allowed[j] && z[j] < -kCostTol) {
          pcol = j;
          break;
        }
    } else {
      double best = -kCostTol;
      for (int j = 0; j < tb.ncols; ++j)
        if (allowed[j] && z[j] < best) {
          best = z[j];
          pcol = j;
        }
    }
    if (pcol < 0) return Status::optimal;
    const int prow = ratio_test(tb, pcol);
    if (prow < 0) return Status::unbounded;

    const double zp = z[pcol];
    pivot(tb, prow, pcol);
    z -= zp * tb.T.row(prow);  // pivot row is rescaled to coefficient 1
    z[pcol] = 0.0;             // keep the invariant exact for basic columns

    if (!bland) {
      // z[rhs] = -objective climbs on progress; a long flat stretch means
      // degeneracy, switch to the provably terminating rule
      if (z[rhs] < last_obj + 1e-12) {
        if (++stall > 200) bland = true;
      } else {
        stall = 0;
      }
      last_obj = z[rhs];
    }
  }
  return Status::iteration_limit;
}

// objective row canonical w.r.t. the current basis: z_j = c_j - c_B B^-1 A_j
Eigen::RowVectorXd canonical_costs(const Tableau& tb, const Eigen::RowVectorXd& cost) {
  Eigen::RowVectorXd z(tb.ncols + 1);
  z.head(tb.ncols) = cost;
  z[tb.ncols] = 0.0;
  for (int i = 0; i < tb.T.rows(); ++i) {
    if (tb.rows[i].deleted) continue;
    const double cb = cost[tb.basis[i]];
    if (cb != 0.0) z -= cb * tb.T.row(i);
  }
  return z;
}

}  // namespace

Solution solve(const Problem& p) {
  const int n = static_cast<int>(p.c.size());
  const int m0 = static_cast<int>(p.b.size());
  if (p.A.rows() != m0 || p.A.cols() != n || p.lb.size() != n || p.ub.size() != n ||
      static_cast<int>(p.row_type.size()) != m0)
    throw std::invalid_argument("lp: inconsistent problem dimensions");
  for (int j = 0; j < n; ++j) {
    if (std::isnan(p.lb[j]) || std::isnan(p.ub[j]) || !std::isfinite(p.c[j]))
      throw std::invalid_argument("lp: invalid bound or cost");
    if (p.lb[j] > p.ub[j]) return Solution{};
  }
  for (int i = 0; i < m0; ++i)
    if (!std::isfinite(p.b[i])) throw std::invalid_argument("lp: invalid rhs");

  // map variables onto nonnegative columns
  std::vector<VarMap> vmap(n);
  int ns = 0;
  int n_bound_rows = 0;
  for (int j = 0; j < n; ++j) {
    if (p.lb[j] > -kInf) {
      vmap[j] = {VarKind::shifted, ns++, -1, p.lb[j]};
      if (p.ub[j] < kInf) ++n_bound_rows;
    } else if (p.ub[j] < kInf) {
      vmap[j] = {VarKind::flipped, ns++, -1, p.ub[j]};
    } else {
      vmap[j] = {VarKind::split, ns, ns + 1, 0.0};
      ns += 2;
    }
  }

  const int m = m0 + n_bound_rows;
  // columns: structural | one slack or surplus per <=/>= row | one artificial
  // per ==/>= row; sized generously and trimmed via the layout below
  Eigen::MatrixXd body = Eigen::MatrixXd::Zero(m, ns);
  Eigen::VectorXd rhs(m);
  std::vector<RowType> type(m);
  std::vector<int> orig_of(m);

  auto emit = [&](int r, int j, double coef) {
    const VarMap& vm = vmap[j];
    switch (vm.kind) {
      case VarKind::shifted:
        body(r, vm.col) += coef;
        rhs[r] -= coef * vm.offset;
        break;
      case VarKind::flipped:
        body(r, vm.col) -= coef;
        rhs[r] -= coef * vm.offset;
        break;
      case VarKind::split:
        body(r, vm.col) += coef;
        body(r, vm.col2) -= coef;
        break;
    }
  };

  for (int i = 0; i < m0; ++i) {
    rhs[i] = p.b[i];
    type[i] = p.row_type[i];
    orig_of[i] = i;
    for (int j = 0; j < n; ++j)
      if (p.A(i, j) != 0.0) emit(i, j, p.A(i, j));
  }
  int r = m0;
  for (int j = 0; j < n; ++j) {
    if (vmap[j].kind == VarKind::shifted && p.ub[j] < kInf) {
      rhs[r] = p.ub[j] - p.lb[j];
      type[r] = RowType::le;
      orig_of[r] = -1;
      body(r, vmap[j].col) = 1.0;
      ++r;
    }
  }

  // normalize to nonnegative rhs and count auxiliary columns
  std::vector<double> sign(m, 1.0);
  int n_slack = 0, n_art = 0;
  std::vector<bool> needs_art(m, false), needs_slack(m, false);
  for (int i = 0; i < m; ++i) {
    if (rhs[i] < 0.0) {
      sign[i] = -1.0;
      rhs[i] = -rhs[i];
      body.row(i) = -body.row(i);
    }
    if (type[i] == RowType::eq) {
      needs_art[i] = true;
    } else if (sign[i] > 0.0) {
      needs_slack[i] = true;  // <= with rhs >= 0
    } else {
      needs_slack[i] = true;  // became >=, surplus plus artificial
      needs_art[i] = true;
    }
    n_slack += needs_slack[i];
    n_art += needs_art[i];
  }

  Tableau tb;
  tb.ncols = ns + n_slack + n_art;
  tb.art_begin = ns + n_slack;
  tb.T = Eigen::MatrixXd::Zero(m, tb.ncols + 1);
  tb.T.block(0, 0, m, ns) = body;
  tb.T.col(tb.ncols) = rhs;
  tb.basis.assign(m, -1);
  tb.rows.resize(m);
  int sc = ns, ac = tb.art_begin;
  for (int i = 0; i < m; ++i) {
    tb.rows[i].orig = orig_of[i];
    tb.rows[i].sign = sign[i];
    if (needs_slack[i]) {
      const double coef = (type[i] == RowType::le && sign[i] < 0.0) ? -1.0 : 1.0;
      tb.T(i, sc) = coef;
      tb.rows[i].slack = sc++;
    }
    if (needs_art[i]) {
      tb.T(i, ac) = 1.0;
      tb.rows[i].art = ac;
      tb.basis[i] = ac++;
    } else {
      tb.basis[i] = tb.rows[i].slack;
    }
  }

  const long max_iter =
      p.max_iterations > 0 ? p.max_iterations : 2000L + 200L * (m + tb.ncols);

  Solution sol;
  std::vector<bool> allowed(tb.ncols, true);

  // phase 1: drive the artificials to zero
  if (n_art > 0) {
    Eigen::RowVectorXd cost1 = Eigen::RowVectorXd::Zero(tb.ncols);
    for (int j = tb.art_begin; j < tb.ncols; ++j) cost1[j] = 1.0;
    Eigen::RowVectorXd z = canonical_costs(tb, cost1);
    const Status st = run_simplex(tb, z, allowed, max_iter);
    if (st != Status::optimal) {
      // the phase-1 objective is bounded below, so unbounded here is noise
      sol.status = Status::iteration_limit;
      return sol;
    }
    double art_sum = 0.0;
    for (int i = 0; i < m; ++i)
      if (tb.basis[i] >= tb.art_begin) art_sum += tb.T(i, tb.ncols);
    if (art_sum > kFeasTol) {
      sol.status = Status::infeasible;
      return sol;
    }
    // pivot leftover artificials out; a row with no eligible pivot is redundant
    for (int i = 0; i < m; ++i) {
      if (tb.basis[i] < tb.art_begin) continue;
      int pcol = -1;
      for (int j = 0; j < tb.art_begin; ++j)
        if (std::abs(tb.T(i, j)) > kPivotTol) {
          pcol = j;
          break;
        }
      if (pcol >= 0) {
        pivot(tb, i, pcol);
      } else {
        tb.rows[i].deleted = true;
        tb.T.row(i).setZero();
      }
    }
  }

  // phase 2: original costs, artificials banned
  for (int j = tb.art_begin; j < tb.ncols; ++j) allowed[j] = false;
  Eigen::RowVectorXd cost2 = Eigen::RowVectorXd::Zero(tb.ncols);
  for (int j = 0; j < n; ++j) {
    const VarMap& vm = vmap[j];
    if (vm.kind == VarKind::flipped) {
      cost2[vm.col] -= p.c[j];
    } else {
      cost2[vm.col] += p.c[j];
      if (vm.kind == VarKind::split) cost2[vm.col2] -= p.c[j];
    }
  }
  Eigen::RowVectorXd z = canonical_costs(tb, cost2);
  const Status st = run_simplex(tb, z, allowed, max_iter);
  if (st != Status::optimal) {
    sol.status = st;
    return sol;
  }

  // read the solution back through the variable map
  Eigen::VectorXd xs = Eigen::VectorXd::Zero(tb.ncols);
  for (int i = 0; i < m; ++i)
    if (!tb.rows[i].deleted) xs[tb.basis[i]] = tb.T(i, tb.ncols);
  sol.x.resize(n);
  for (int j = 0; j < n; ++j) {
    const VarMap& vm = vmap[j];
    switch (vm.kind) {
      case VarKind::shifted: sol.x[j] = vm.offset + xs[vm.col]; break;
      case VarKind::flipped: sol.x[j] = vm.offset - xs[vm.col]; break;
      case VarKind::split: sol.x[j] = xs[vm.col] - xs[vm.col2]; break;
    }
  }
  sol.objective = p.c.dot(sol.x);

  // row duals from the reduced costs of each row's own auxiliary column:
  // for column +-e_r, rc = -+ y_r, and the sign flip maps back to the
  // original orientation
  sol.row_duals = Eigen::VectorXd::Zero(m0);
  for (int i = 0; i < m; ++i) {
    const RowInfo& ri = tb.rows[i];
    if (ri.orig < 0 || ri.deleted) continue;
    double y;
    if (ri.art >= 0) {
      y = -z[ri.art];
    } else {
      y = -z[ri.slack];
    }
    sol.row_duals[ri.orig] = ri.sign * y;
  }
  sol.status = Status::optimal;
  return sol;
}

}  // namespace scengen::lp
