#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "scengen/lp.hpp"
#include "scengen/nn.hpp"

#include <cmath>
#include <vector>

using namespace scengen;

namespace {

// independent oracle for small boxed instances: every vertex of a bounded
// pointed polyhedron is the solution of n active facets, so enumerate all
// facet subsets, keep the feasible intersections, and take the best
struct VertexOracle {
  bool feasible = false;
  double objective = 0.0;
};

VertexOracle enumerate_vertices(const lp::Problem& p) {
  const int n = static_cast<int>(p.c.size());
  const int m = static_cast<int>(p.b.size());

  // facets: original rows first, then lower and upper bound planes
  std::vector<Eigen::RowVectorXd> an;
  std::vector<double> bn;
  std::vector<bool> is_eq;
  for (int i = 0; i < m; ++i) {
    an.push_back(p.A.row(i));
    bn.push_back(p.b[i]);
    is_eq.push_back(p.row_type[i] == lp::RowType::eq);
  }
  for (int j = 0; j < n; ++j) {
    Eigen::RowVectorXd e = Eigen::RowVectorXd::Zero(n);
    e[j] = -1.0;
    an.push_back(e);
    bn.push_back(-p.lb[j]);
    is_eq.push_back(false);
    an.push_back(-e);
    bn.push_back(p.ub[j]);
    is_eq.push_back(false);
  }
  const int f = static_cast<int>(an.size());
  REQUIRE(f <= 20);

  VertexOracle out;
  for (long mask = 0; mask < (1L << f); ++mask) {
    if (__builtin_popcountl(mask) != n) continue;
    bool has_all_eq = true;
    for (int i = 0; i < f; ++i)
      if (is_eq[i] && !(mask & (1L << i))) has_all_eq = false;
    if (!has_all_eq) continue;

    Eigen::MatrixXd M(n, n);
    Eigen::VectorXd rhs(n);
    int r = 0;
    for (int i = 0; i < f; ++i) {
      if (!(mask & (1L << i))) continue;
      M.row(r) = an[i];
      rhs[r] = bn[i];
      ++r;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    if (!lu.isInvertible()) continue;
    Eigen::VectorXd x = lu.solve(rhs);

    bool ok = true;
    for (int i = 0; i < f && ok; ++i) {
      const double v = an[i].dot(x);
      if (is_eq[i]) {
        if (std::abs(v - bn[i]) > 1e-7) ok = false;
      } else if (v > bn[i] + 1e-7) {
        ok = false;
      }
    }
    if (!ok) continue;
    const double obj = p.c.dot(x);
    if (!out.feasible || obj < out.objective) {
      out.feasible = true;
      out.objective = obj;
    }
  }
  return out;
}

lp::Problem boxed_problem(int n, int m, nn::Rng& rng) {
  lp::Problem p;
  p.c.resize(n);
  for (int j = 0; j < n; ++j) p.c[j] = rng.normal();
  p.lb = Eigen::VectorXd::Constant(n, -2.0);
  p.ub = Eigen::VectorXd::Constant(n, 2.0);
  p.A.resize(m, n);
  p.b.resize(m);
  Eigen::VectorXd x0(n);
  for (int j = 0; j < n; ++j) x0[j] = -1.5 + 3.0 * rng.uniform();
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) p.A(i, j) = rng.normal();
    // margin straddles zero, so a third or so of the instances are infeasible
    p.b[i] = p.A.row(i).dot(x0) + 2.0 * rng.uniform() - 0.7;
    p.row_type.push_back(rng.uniform() < 0.25 ? lp::RowType::eq : lp::RowType::le);
  }
  return p;
}

}  // namespace

TEST_CASE("known production-mix optimum and duals") {
  lp::Problem p;
  p.c.resize(2);
  p.c << -3, -5;
  p.A.resize(3, 2);
  p.A << 1, 0, 0, 2, 3, 2;
  p.b.resize(3);
  p.b << 4, 12, 18;
  p.row_type = {lp::RowType::le, lp::RowType::le, lp::RowType::le};
  p.lb = Eigen::VectorXd::Zero(2);
  p.ub = Eigen::VectorXd::Constant(2, lp::kInf);

  lp::Solution s = lp::solve(p);
  REQUIRE(s.status == lp::Status::optimal);
  CHECK(s.objective == doctest::Approx(-36.0).epsilon(1e-9));
  CHECK(s.x[0] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(s.x[1] == doctest::Approx(6.0).epsilon(1e-9));
  CHECK(s.row_duals[0] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(s.row_duals[1] == doctest::Approx(-1.5).epsilon(1e-9));
  CHECK(s.row_duals[2] == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("mixed bounds: shifted, flipped, and free variables") {
  // min 2x + 3y - z  st  x + y + z = 10,  x - y <= 2,
  // x in [0, 8], y free, z in (-inf, 5]
  lp::Problem p;
  p.c.resize(3);
  p.c << 2, 3, -1;
  p.A.resize(2, 3);
  p.A << 1, 1, 1, 1, -1, 0;
  p.b.resize(2);
  p.b << 10, 2;
  p.row_type = {lp::RowType::eq, lp::RowType::le};
  p.lb.resize(3);
  p.lb << 0, -lp::kInf, -lp::kInf;
  p.ub.resize(3);
  p.ub << 8, lp::kInf, 5;

  lp::Solution s = lp::solve(p);
  REQUIRE(s.status == lp::Status::optimal);
  CHECK(s.objective == doctest::Approx(6.5).epsilon(1e-9));
  CHECK(s.x[0] == doctest::Approx(3.5).epsilon(1e-9));
  CHECK(s.x[1] == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(s.x[2] == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(s.row_duals[0] == doctest::Approx(2.5).epsilon(1e-9));
  CHECK(s.row_duals[1] == doctest::Approx(-0.5).epsilon(1e-9));
}

TEST_CASE("degenerate pivoting terminates at the optimum") {
  // classic cycling trap for naive most-negative pricing
  lp::Problem p;
  p.c.resize(4);
  p.c << -0.75, 150, -0.02, 6;
  p.A.resize(3, 4);
  p.A << 0.25, -60, -0.04, 9, 0.5, -90, -0.02, 3, 0, 0, 1, 0;
  p.b.resize(3);
  p.b << 0, 0, 1;
  p.row_type = {lp::RowType::le, lp::RowType::le, lp::RowType::le};
  p.lb = Eigen::VectorXd::Zero(4);
  p.ub = Eigen::VectorXd::Constant(4, lp::kInf);

  lp::Solution s = lp::solve(p);
  REQUIRE(s.status == lp::Status::optimal);
  CHECK(s.objective == doctest::Approx(-0.05).epsilon(1e-9));
  CHECK(s.x[0] == doctest::Approx(0.04).epsilon(1e-7));
  CHECK(s.x[2] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("infeasible, unbounded, and iteration-capped instances") {
  SUBCASE("contradictory rows") {
    lp::Problem p;
    p.c = Eigen::VectorXd::Ones(1);
    p.A.resize(1, 1);
    p.A << 1;
    p.b.resize(1);
    p.b << -1;
    p.row_type = {lp::RowType::le};
    p.lb = Eigen::VectorXd::Zero(1);
    p.ub = Eigen::VectorXd::Constant(1, lp::kInf);
    CHECK(lp::solve(p).status == lp::Status::infeasible);
  }
  SUBCASE("crossed bounds") {
    lp::Problem p;
    p.c = Eigen::VectorXd::Ones(1);
    p.A.resize(0, 1);
    p.b.resize(0);
    p.lb = Eigen::VectorXd::Ones(1);
    p.ub = Eigen::VectorXd::Zero(1);
    CHECK(lp::solve(p).status == lp::Status::infeasible);
  }
  SUBCASE("descent direction with no facet") {
    lp::Problem p;
    p.c.resize(2);
    p.c << -1, 0;
    p.A.resize(1, 2);
    p.A << 0, 1;
    p.b.resize(1);
    p.b << 3;
    p.row_type = {lp::RowType::le};
    p.lb = Eigen::VectorXd::Zero(2);
    p.ub = Eigen::VectorXd::Constant(2, lp::kInf);
    CHECK(lp::solve(p).status == lp::Status::unbounded);
  }
  SUBCASE("iteration limit reported") {
    lp::Problem p;
    p.c.resize(2);
    p.c << -3, -5;
    p.A.resize(3, 2);
    p.A << 1, 0, 0, 2, 3, 2;
    p.b.resize(3);
    p.b << 4, 12, 18;
    p.row_type = {lp::RowType::le, lp::RowType::le, lp::RowType::le};
    p.lb = Eigen::VectorXd::Zero(2);
    p.ub = Eigen::VectorXd::Constant(2, lp::kInf);
    p.max_iterations = 1;
    CHECK(lp::solve(p).status == lp::Status::iteration_limit);
  }
  SUBCASE("shape mismatch throws") {
    lp::Problem p;
    p.c = Eigen::VectorXd::Ones(2);
    p.A.resize(1, 1);
    p.A << 1;
    p.b.resize(1);
    p.b << 1;
    p.row_type = {lp::RowType::le};
    p.lb = Eigen::VectorXd::Zero(2);
    p.ub = Eigen::VectorXd::Ones(2);
    CHECK_THROWS_AS(lp::solve(p), std::invalid_argument);
  }
}

TEST_CASE("fixed variables pass straight through") {
  // x fixed at 2 by its bounds, y free to absorb the equality
  lp::Problem p;
  p.c.resize(2);
  p.c << 1, 1;
  p.A.resize(1, 2);
  p.A << 1, 1;
  p.b.resize(1);
  p.b << 5;
  p.row_type = {lp::RowType::eq};
  p.lb.resize(2);
  p.lb << 2, 0;
  p.ub.resize(2);
  p.ub << 2, lp::kInf;

  lp::Solution s = lp::solve(p);
  REQUIRE(s.status == lp::Status::optimal);
  CHECK(s.x[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(s.x[1] == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("randomized boxed instances agree with vertex enumeration") {
  nn::Rng rng(31);
  int feasible_seen = 0, infeasible_seen = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_int(3));  // 2..4 variables
    const int m = 1 + static_cast<int>(rng.uniform_int(3));  // 1..3 rows
    lp::Problem p = boxed_problem(n, m, rng);
    VertexOracle oracle = enumerate_vertices(p);
    lp::Solution s = lp::solve(p);
    if (oracle.feasible) {
      ++feasible_seen;
      REQUIRE(s.status == lp::Status::optimal);
      CHECK(s.objective == doctest::Approx(oracle.objective).epsilon(1e-6));
      // the reported point must itself satisfy every constraint
      for (int i = 0; i < p.A.rows(); ++i) {
        const double v = p.A.row(i).dot(s.x);
        if (p.row_type[i] == lp::RowType::eq) {
          CHECK(std::abs(v - p.b[i]) < 1e-6);
        } else {
          CHECK(v < p.b[i] + 1e-6);
        }
      }
      for (int j = 0; j < n; ++j) {
        CHECK(s.x[j] > p.lb[j] - 1e-6);
        CHECK(s.x[j] < p.ub[j] + 1e-6);
      }
    } else {
      ++infeasible_seen;
      CHECK(s.status == lp::Status::infeasible);
    }
  }
  // the generator must exercise both outcomes
  CHECK(feasible_seen > 50);
  CHECK(infeasible_seen > 10);
}

TEST_CASE("duals price a battery-style dispatch stage") {
  // two periods: bids e = (1, -0.5), pv = (0.8, 0), wind = (0.3, 0.4),
  // load = (1, 1.2), q = 100, lambda = 50, battery 1 MWh at 95% efficiency;
  // per period the variables are y, d-, d+, pv, w, charge, discharge, soc
  const double eta = 0.95;
  const int nv = 16;
  auto id = [](int block, int t) { return 2 * block + t; };
  const int y = 0, dm = 1, dp = 2, PV = 3, W = 4, CH = 5, DI = 6, SOC = 7;

  lp::Problem p;
  p.c = Eigen::VectorXd::Zero(nv);
  p.c[id(dm, 0)] = 100.0;
  p.c[id(dm, 1)] = 100.0;
  p.c[id(dp, 0)] = 50.0;
  p.c[id(dp, 1)] = 50.0;

  const double e[2] = {1.0, -0.5};
  const double pv[2] = {0.8, 0.0}, w[2] = {0.3, 0.4}, load[2] = {1.0, 1.2};
  p.A = Eigen::MatrixXd::Zero(10, nv);
  p.b.resize(10);
  int r = 0;
  for (int t = 0; t < 2; ++t) {  // d-_t >= e_t - y_t
    p.A(r, id(y, t)) = -1;
    p.A(r, id(dm, t)) = -1;
    p.b[r] = -e[t];
    p.row_type.push_back(lp::RowType::le);
    ++r;
  }
  for (int t = 0; t < 2; ++t) {  // d+_t >= y_t - e_t
    p.A(r, id(y, t)) = 1;
    p.A(r, id(dp, t)) = -1;
    p.b[r] = e[t];
    p.row_type.push_back(lp::RowType::le);
    ++r;
  }
  for (int t = 0; t < 2; ++t) {  // relaxed exclusivity
    p.A(r, id(CH, t)) = 1;
    p.A(r, id(DI, t)) = 1;
    p.b[r] = 0.5;
    p.row_type.push_back(lp::RowType::le);
    ++r;
  }
  for (int t = 0; t < 2; ++t) {  // energy balance
    p.A(r, id(y, t)) = 1;
    p.A(r, id(PV, t)) = -1;
    p.A(r, id(W, t)) = -1;
    p.A(r, id(DI, t)) = -1;
    p.A(r, id(CH, t)) = 1;
    p.b[r] = -load[t];
    p.row_type.push_back(lp::RowType::eq);
    ++r;
  }
  p.A(r, id(SOC, 0)) = 1;  // state of charge after the first period
  p.A(r, id(CH, 0)) = -eta;
  p.A(r, id(DI, 0)) = 1.0 / eta;
  p.b[r] = 0.0;
  p.row_type.push_back(lp::RowType::eq);
  ++r;
  p.A(r, id(SOC, 1)) = 1;
  p.A(r, id(SOC, 0)) = -1;
  p.A(r, id(CH, 1)) = -eta;
  p.A(r, id(DI, 1)) = 1.0 / eta;
  p.b[r] = 0.0;
  p.row_type.push_back(lp::RowType::eq);

  p.lb = Eigen::VectorXd::Zero(nv);
  p.ub = Eigen::VectorXd::Zero(nv);
  for (int t = 0; t < 2; ++t) {
    p.lb[id(y, t)] = -3.5;
    p.ub[id(y, t)] = 3.5;
    p.ub[id(dm, t)] = lp::kInf;
    p.ub[id(dp, t)] = lp::kInf;
    p.ub[id(PV, t)] = pv[t];
    p.ub[id(W, t)] = w[t];
    p.ub[id(CH, t)] = 0.5;
    p.ub[id(DI, t)] = 0.5;
  }
  p.ub[id(SOC, 0)] = 1.0;  // terminal soc pinned to zero by its bounds

  lp::Solution s = lp::solve(p);
  REQUIRE(s.status == lp::Status::optimal);
  CHECK(s.objective == doctest::Approx(120.0).epsilon(1e-9));
  // short in both periods, so the bid-side rows carry the full penalty price
  CHECK(s.row_duals[0] == doctest::Approx(-100.0).epsilon(1e-9));
  CHECK(s.row_duals[1] == doctest::Approx(-100.0).epsilon(1e-9));
  CHECK(s.row_duals[2] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(s.row_duals[3] == doctest::Approx(0.0).epsilon(1e-9));
  // an extra MWh in either balance row is worth the avoided penalty
  CHECK(s.row_duals[6] == doctest::Approx(-100.0).epsilon(1e-9));
  CHECK(s.row_duals[7] == doctest::Approx(-100.0).epsilon(1e-9));
  // the idle battery makes the soc rows degenerate: any price between the
  // charge path (-100/eta) and the discharge path (-100*eta) is a valid dual
  for (int row : {8, 9}) {
    CHECK(s.row_duals[row] > -100.0 / eta - 1e-9);
    CHECK(s.row_duals[row] < -100.0 * eta + 1e-9);
  }

  // the rhs sensitivity the duals claim must match actual re-solves
  for (int row : {0, 1, 6, 7}) {
    lp::Problem q = p;
    q.b[row] += 1e-4;
    lp::Solution s2 = lp::solve(q);
    REQUIRE(s2.status == lp::Status::optimal);
    CHECK(s2.objective - s.objective ==
          doctest::Approx(1e-4 * s.row_duals[row]).epsilon(1e-4));
  }

  // soc-row one-sided sensitivities: spare charge discharges at 100*eta,
  // missing charge is refilled at 100/eta
  {
    lp::Problem q = p;
    q.b[8] = 1e-4;
    CHECK(lp::solve(q).objective - s.objective == doctest::Approx(-95.0e-4).epsilon(1e-6));
    q.b[8] = -1e-4;
    CHECK(lp::solve(q).objective - s.objective ==
          doctest::Approx(100.0 / eta * 1e-4).epsilon(1e-6));
  }
}
