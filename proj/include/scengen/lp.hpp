#pragma once
// Dense two-phase primal simplex for the small linear programs behind the
// bidding engine: minimize c^T x subject to mixed <= / == rows and per-variable
// bounds (infinities allowed). Dantzig pricing with a Bland fallback, so
// degenerate instances cannot cycle.

#include <Eigen/Dense>

#include <limits>
#include <vector>

namespace scengen::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowType { le, eq };
enum class Status { optimal, infeasible, unbounded, iteration_limit };

struct Problem {
  Eigen::VectorXd c;                // (n)
  Eigen::MatrixXd A;                // (m x n), one row per constraint
  Eigen::VectorXd b;                // (m)
  std::vector<RowType> row_type;    // (m)
  Eigen::VectorXd lb, ub;           // (n), +-kInf for unbounded sides
  int max_iterations = 0;           // 0 = automatic from problem size
};

struct Solution {
  Status status = Status::infeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
  // d(objective)/d(b_i) at the optimum; 0 for redundant rows
  Eigen::VectorXd row_duals;
};

Solution solve(const Problem& p);

}  // namespace scengen::lp
