#include "scengen/value.hpp"

#include "scengen/csv.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace scengen::value {
namespace {

constexpr double kExclTol = 1e-7;  // charge*discharge above this counts as simultaneous
constexpr int kBlocks = 8;         // recourse variable groups per scenario

enum Blk { kY = 0, kShort, kSurplus, kPv, kWind, kCha, kDis, kSoc };

// column of recourse block blk for scenario w, period t; first-stage columns
// occupy [0, first)
int col(int first, int T, int w, int blk, int t) {
  return first + (w * kBlocks + blk) * T + t;
}

const char* status_name(lp::Status s) {
  switch (s) {
    case lp::Status::optimal: return "optimal";
    case lp::Status::infeasible: return "infeasible";
    case lp::Status::unbounded: return "unbounded";
    default: return "iteration limit";
  }
}

lp::Solution solve_or_throw(const lp::Problem& p, const char* what) {
  lp::Solution s = lp::solve(p);
  if (s.status != lp::Status::optimal)
    throw std::runtime_error(std::string(what) + " subproblem " + status_name(s.status));
  return s;
}

// Extensive-form LP over the given scenario rows. Bids are columns [0, T)
// unless e_fixed pins them, in which case they enter the deviation rows'
// right-hand sides. Minimizes negated expected profit (or just expected
// imbalance cost when bids are fixed).
lp::Problem build_lp(const BiddingInstance& inst, const Eigen::MatrixXd& pv,
                     const Eigen::MatrixXd& wind, const Eigen::MatrixXd& load,
                     const Eigen::VectorXd* e_fixed) {
  const int T = inst.T;
  const int W = static_cast<int>(pv.rows());
  const int first = e_fixed ? 0 : T;
  const int n = first + W * kBlocks * T;
  const int m = W * 5 * T;
  const double alpha = 1.0 / W;
  const double plim = inst.battery.power_limit();

  lp::Problem p;
  p.c = Eigen::VectorXd::Zero(n);
  p.A = Eigen::MatrixXd::Zero(m, n);
  p.b = Eigen::VectorXd::Zero(m);
  p.row_type.assign(m, lp::RowType::le);
  p.lb = Eigen::VectorXd::Constant(n, -lp::kInf);
  p.ub = Eigen::VectorXd::Constant(n, lp::kInf);

  if (!e_fixed)
    for (int t = 0; t < T; ++t) {
      p.c[t] = -inst.dt * inst.prices[t];
      p.lb[t] = inst.e_min;
      p.ub[t] = inst.e_max;
    }

  for (int w = 0; w < W; ++w) {
    const int r0 = w * 5 * T;
    for (int t = 0; t < T; ++t) {
      const int cy = col(first, T, w, kY, t);
      const int csh = col(first, T, w, kShort, t);
      const int csu = col(first, T, w, kSurplus, t);
      const int cpv = col(first, T, w, kPv, t);
      const int cw = col(first, T, w, kWind, t);
      const int cc = col(first, T, w, kCha, t);
      const int cd = col(first, T, w, kDis, t);
      const int cs = col(first, T, w, kSoc, t);

      p.c[csh] = alpha * inst.dt * inst.short_price[t];
      p.c[csu] = alpha * inst.dt * inst.long_price[t];

      p.lb[cy] = inst.y_min;
      p.ub[cy] = inst.y_max;
      p.lb[csh] = 0.0;
      p.lb[csu] = 0.0;
      p.lb[cpv] = 0.0;
      p.ub[cpv] = pv(w, t);
      p.lb[cw] = 0.0;
      p.ub[cw] = wind(w, t);
      p.lb[cc] = 0.0;
      p.ub[cc] = plim;
      p.lb[cd] = 0.0;
      p.ub[cd] = plim;
      p.lb[cs] = inst.battery.s_min;
      p.ub[cs] = inst.battery.s_max;
      if (t == T - 1) p.lb[cs] = p.ub[cs] = inst.battery.s_end;

      // shortfall covers the bid: e - y - d^- <= 0
      int r = r0 + t;
      p.A(r, cy) = -1.0;
      p.A(r, csh) = -1.0;
      if (e_fixed) p.b[r] = -(*e_fixed)[t];
      else p.A(r, t) = 1.0;
      // surplus covers overdelivery: y - e - d^+ <= 0
      r = r0 + T + t;
      p.A(r, cy) = 1.0;
      p.A(r, csu) = -1.0;
      if (e_fixed) p.b[r] = (*e_fixed)[t];
      else p.A(r, t) = -1.0;
      // shared power cap, the linear relaxation of one-direction operation
      r = r0 + 2 * T + t;
      p.A(r, cc) = 1.0;
      p.A(r, cd) = 1.0;
      p.b[r] = plim;
      // energy balance: y = pv + wind + discharge - charge - load
      r = r0 + 3 * T + t;
      p.row_type[r] = lp::RowType::eq;
      p.A(r, cy) = 1.0;
      p.A(r, cpv) = -1.0;
      p.A(r, cw) = -1.0;
      p.A(r, cd) = -1.0;
      p.A(r, cc) = 1.0;
      p.b[r] = -load(w, t);
      // storage dynamics: soc_t - soc_{t-1} = dt * (eta_cha*charge - discharge/eta_dis)
      r = r0 + 4 * T + t;
      p.row_type[r] = lp::RowType::eq;
      p.A(r, cs) = 1.0;
      p.A(r, cc) = -inst.dt * inst.battery.eta_cha;
      p.A(r, cd) = inst.dt / inst.battery.eta_dis;
      if (t > 0) p.A(r, col(first, T, w, kSoc, t - 1)) = -1.0;
      p.b[r] = t == 0 ? inst.battery.s_ini : 0.0;
    }
  }
  return p;
}

StagePlan read_stage(const Eigen::VectorXd& x, const BiddingInstance& inst, int first, int w) {
  const int T = inst.T;
  auto grab = [&](int blk) { return Eigen::VectorXd(x.segment(col(first, T, w, blk, 0), T)); };
  StagePlan out;
  out.y = grab(kY);
  out.shortfall = grab(kShort);
  out.surplus = grab(kSurplus);
  out.pv = grab(kPv);
  out.wind = grab(kWind);
  out.charge = grab(kCha);
  out.discharge = grab(kDis);
  out.soc = grab(kSoc);
  out.penalty = 0.0;
  for (int t = 0; t < T; ++t)
    out.penalty += inst.dt * (inst.short_price[t] * out.shortfall[t] +
                              inst.long_price[t] * out.surplus[t]);
  return out;
}

// Zeroes the smaller side of every simultaneous charge/discharge pair and
// re-solves until the pattern is clean. Each pass permanently fixes at least
// one new pair, so the loop is bounded by the pair count. Returns the cost
// increase in the problem's (minimized) objective.
double repair_exclusivity(lp::Problem& p, lp::Solution& s, const BiddingInstance& inst,
                          int first, int W, const char* what) {
  const double base = s.objective;
  for (int pass = 0; pass <= W * inst.T; ++pass) {
    bool dirty = false;
    for (int w = 0; w < W; ++w)
      for (int t = 0; t < inst.T; ++t) {
        const int cc = col(first, inst.T, w, kCha, t);
        const int cd = col(first, inst.T, w, kDis, t);
        if (std::min(s.x[cc], s.x[cd]) > kExclTol) {
          p.ub[s.x[cc] >= s.x[cd] ? cd : cc] = 0.0;
          dirty = true;
        }
      }
    if (!dirty) return s.objective - base;
    s = solve_or_throw(p, what);
  }
  throw std::logic_error("exclusivity repair did not converge");
}

Eigen::MatrixXd as_row(const Eigen::VectorXd& v) { return v.transpose(); }

void require_observation(const Observation& obs, int T) {
  if (obs.pv.size() != T || obs.wind.size() != T || obs.load.size() != T)
    throw std::invalid_argument("observation length does not match the instance horizon");
}

void require_scenarios(const ScenarioSet& scen, const BiddingInstance& inst) {
  if (scen.count() < 1) throw std::invalid_argument("scenario set is empty");
  if (scen.wind.rows() != scen.count() || scen.load.rows() != scen.count() ||
      scen.pv.cols() != inst.T || scen.wind.cols() != inst.T || scen.load.cols() != inst.T)
    throw std::invalid_argument("scenario sets disagree on count or horizon");
}

PlanResult plan_relaxed(const BiddingInstance& inst, const ScenarioSet& scen,
                        const PlanOptions& opt) {
  const int T = inst.T;
  const int W = scen.count();
  const double alpha = 1.0 / W;

  // small instances: solve the extensive form outright
  if (T * (1 + kBlocks * W) <= opt.extensive_limit) {
    const lp::Problem p = build_lp(inst, scen.pv, scen.wind, scen.load, nullptr);
    const lp::Solution sol = solve_or_throw(p, "bid planning");
    PlanResult res;
    res.bids = sol.x.head(T);
    res.objective = -sol.objective;
    res.rounds = 1;
    res.bound_gap = 0.0;
    return res;
  }

  // one recourse LP per scenario; bids only enter the deviation rows' rhs
  Eigen::VectorXd e = Eigen::VectorXd::Zero(T).cwiseMax(inst.e_min).cwiseMin(inst.e_max);
  std::vector<lp::Problem> stage;
  stage.reserve(W);
  for (int w = 0; w < W; ++w)
    stage.push_back(build_lp(inst, as_row(scen.pv.row(w)), as_row(scen.wind.row(w)),
                             as_row(scen.load.row(w)), &e));

  // outer approximation: value_w(e) is concave piecewise-linear, each round
  // adds the supporting plane at the current bids from the recourse duals
  struct Cut {
    int w;
    Eigen::VectorXd slope;
    double offset;
  };
  std::vector<Cut> cuts;

  PlanResult res;
  res.bids = e;
  res.objective = -lp::kInf;
  double upper = lp::kInf;

  for (int round = 1; round <= opt.max_rounds; ++round) {
    double expected = 0.0;
    for (int w = 0; w < W; ++w) {
      for (int t = 0; t < T; ++t) {
        stage[w].b[t] = -e[t];
        stage[w].b[T + t] = e[t];
      }
      const lp::Solution sol = solve_or_throw(stage[w], "bid planning");
      double value = 0.0;
      Eigen::VectorXd slope(T);
      for (int t = 0; t < T; ++t)
        slope[t] = sol.row_duals[t] - sol.row_duals[T + t];
      value = -sol.objective;
      expected += alpha * value;
      cuts.push_back({w, slope, value - slope.dot(e)});
    }
    const double val = inst.dt * inst.prices.dot(e) + expected;
    if (val > res.objective) {
      res.objective = val;
      res.bids = e;
    }

    // master over bids and one epigraph variable per scenario
    lp::Problem master;
    const int n = T + W;
    master.c = Eigen::VectorXd::Zero(n);
    master.lb = Eigen::VectorXd::Constant(n, -lp::kInf);
    master.ub = Eigen::VectorXd::Constant(n, 0.0);
    for (int t = 0; t < T; ++t) {
      master.c[t] = -inst.dt * inst.prices[t];
      master.lb[t] = inst.e_min;
      master.ub[t] = inst.e_max;
    }
    for (int w = 0; w < W; ++w) master.c[T + w] = -alpha;
    const int m = static_cast<int>(cuts.size());
    master.A = Eigen::MatrixXd::Zero(m, n);
    master.b = Eigen::VectorXd::Zero(m);
    master.row_type.assign(m, lp::RowType::le);
    for (int i = 0; i < m; ++i) {
      master.A(i, T + cuts[i].w) = 1.0;
      master.A.row(i).head(T) = -cuts[i].slope.transpose();
      master.b[i] = cuts[i].offset;
    }
    const lp::Solution ms = solve_or_throw(master, "bid planning master");
    upper = -ms.objective;
    res.rounds = round;
    res.bound_gap = upper - res.objective;
    if (res.bound_gap <= opt.tol * std::max(1.0, std::abs(upper))) break;
    // in-out stabilization: cut at the midpoint between the incumbent and the
    // master vertex; periodic pure master points keep convergence finite
    if (round % 3 == 0) e = ms.x.head(T);
    else e = 0.5 * (ms.x.head(T) + res.bids);
  }
  return res;
}

PlanResult plan_exact(const BiddingInstance& inst, const ScenarioSet& scen,
                      const PlanOptions& opt) {
  const int T = inst.T;
  const int W = scen.count();
  const int pairs = inst.battery.power_limit() > 0.0 ? T * W : 0;
  if (pairs > opt.max_binaries) {
    std::ostringstream msg;
    msg << "exact planner handles at most " << opt.max_binaries
        << " charge/discharge pairs; instance has " << pairs;
    throw std::runtime_error(msg.str());
  }
  if (T * W > 64)
    throw std::runtime_error("exact planner supports at most 64 scenario-periods");

  const lp::Problem base = build_lp(inst, scen.pv, scen.wind, scen.load, nullptr);

  PlanResult res;
  res.objective = -lp::kInf;
  res.bound_gap = 0.0;
  int nodes = 0;

  // depth-first branch and bound on the exclusivity pattern; each branch
  // fixes one side of the most violated pair to zero
  std::function<void(lp::Problem&)> visit = [&](lp::Problem& p) {
    ++nodes;
    const lp::Solution sol = lp::solve(p);
    if (sol.status != lp::Status::optimal) return;  // side fixes made this branch infeasible
    const double bound = -sol.objective;
    if (bound <= res.objective + 1e-12) return;
    int bw = -1, bt = -1;
    double worst = kExclTol;
    for (int w = 0; w < W; ++w)
      for (int t = 0; t < T; ++t) {
        const double v = std::min(sol.x[col(T, T, w, kCha, t)], sol.x[col(T, T, w, kDis, t)]);
        if (v > worst) {
          worst = v;
          bw = w;
          bt = t;
        }
      }
    if (bw < 0) {
      res.objective = bound;
      res.bids = sol.x.head(T);
      return;
    }
    const int cc = col(T, T, bw, kCha, bt);
    const int cd = col(T, T, bw, kDis, bt);
    const int keep_first = sol.x[cc] >= sol.x[cd] ? cd : cc;
    const int keep_second = keep_first == cd ? cc : cd;
    for (int side : {keep_first, keep_second}) {
      const double saved = p.ub[side];
      p.ub[side] = 0.0;
      visit(p);
      p.ub[side] = saved;
    }
  };
  lp::Problem root = base;
  visit(root);
  res.rounds = nodes;
  if (!std::isfinite(res.objective)) throw std::runtime_error("exact planner found no feasible plan");
  return res;
}

}  // namespace

BiddingInstance market_instance(const Eigen::VectorXd& prices, double dt) {
  BiddingInstance inst;
  inst.T = static_cast<int>(prices.size());
  inst.dt = dt;
  inst.prices = prices;
  inst.short_price = 2.0 * prices;
  inst.long_price = 2.0 * prices;
  validate(inst);
  return inst;
}

void validate(const BiddingInstance& inst) {
  if (inst.T < 1) throw std::invalid_argument("instance needs at least one period");
  if (!(inst.dt > 0.0)) throw std::invalid_argument("period length must be positive");
  if (inst.prices.size() != inst.T || inst.short_price.size() != inst.T ||
      inst.long_price.size() != inst.T)
    throw std::invalid_argument("price vectors must cover every period");
  if (!inst.prices.allFinite() || !inst.short_price.allFinite() || !inst.long_price.allFinite())
    throw std::invalid_argument("prices must be finite");
  if (inst.short_price.minCoeff() < 0.0 || inst.long_price.minCoeff() < 0.0)
    throw std::invalid_argument("imbalance prices must be nonnegative");
  const Battery& bt = inst.battery;
  if (!(bt.s_min <= bt.s_ini && bt.s_ini <= bt.s_max) ||
      !(bt.s_min <= bt.s_end && bt.s_end <= bt.s_max))
    throw std::invalid_argument("battery state targets must lie within capacity");
  if (!(bt.eta_cha > 0.0 && bt.eta_cha <= 1.0 && bt.eta_dis > 0.0 && bt.eta_dis <= 1.0))
    throw std::invalid_argument("battery efficiencies must lie in (0, 1]");
  if (inst.e_min > inst.e_max || inst.y_min > inst.y_max)
    throw std::invalid_argument("crossed bid or position bounds");
}

lp::Problem planner_problem(const BiddingInstance& inst, const ScenarioSet& scen) {
  validate(inst);
  require_scenarios(scen, inst);
  return build_lp(inst, scen.pv, scen.wind, scen.load, nullptr);
}

DispatchResult dispatch(const Eigen::VectorXd& bids, const Observation& obs,
                        const BiddingInstance& inst) {
  validate(inst);
  require_observation(obs, inst.T);
  if (bids.size() != inst.T) throw std::invalid_argument("bid vector length mismatch");
  if (bids.minCoeff() < inst.e_min - 1e-9 || bids.maxCoeff() > inst.e_max + 1e-9)
    throw std::invalid_argument("bids violate the market bounds");

  lp::Problem p = build_lp(inst, as_row(obs.pv), as_row(obs.wind), as_row(obs.load), &bids);
  lp::Solution sol = solve_or_throw(p, "dispatch");
  DispatchResult out;
  out.repair_gap = repair_exclusivity(p, sol, inst, 0, 1, "dispatch");
  out.bids = bids;
  out.stage = read_stage(sol.x, inst, 0, 0);
  out.objective = inst.dt * inst.prices.dot(bids) - out.stage.penalty;
  out.net_profit = out.objective;
  return out;
}

DispatchResult oracle(const Observation& obs, const BiddingInstance& inst) {
  validate(inst);
  require_observation(obs, inst.T);
  ScenarioSet single{as_row(obs.pv), as_row(obs.wind), as_row(obs.load)};
  lp::Problem p = build_lp(inst, single.pv, single.wind, single.load, nullptr);
  lp::Solution sol = solve_or_throw(p, "oracle");
  DispatchResult out;
  out.repair_gap = repair_exclusivity(p, sol, inst, inst.T, 1, "oracle");
  out.bids = sol.x.head(inst.T);
  out.stage = read_stage(sol.x, inst, inst.T, 0);
  out.objective = inst.dt * inst.prices.dot(out.bids) - out.stage.penalty;
  out.net_profit = out.objective;
  return out;
}

void check_dispatch(const DispatchResult& r, const Observation& obs,
                    const BiddingInstance& inst, double tol) {
  const int T = inst.T;
  auto fail = [](const std::string& what, int t) {
    std::ostringstream msg;
    msg << "dispatch check failed: " << what << " at period " << t;
    throw std::runtime_error(msg.str());
  };
  require_observation(obs, T);
  const StagePlan& s = r.stage;
  if (r.bids.size() != T || s.y.size() != T || s.shortfall.size() != T ||
      s.surplus.size() != T || s.pv.size() != T || s.wind.size() != T ||
      s.charge.size() != T || s.discharge.size() != T || s.soc.size() != T)
    throw std::runtime_error("dispatch check failed: vector length mismatch");

  const Battery& bt = inst.battery;
  const double plim = bt.power_limit();
  double penalty = 0.0;
  double prev = bt.s_ini;
  for (int t = 0; t < T; ++t) {
    if (r.bids[t] < inst.e_min - tol || r.bids[t] > inst.e_max + tol) fail("bid bounds", t);
    if (s.y[t] < inst.y_min - tol || s.y[t] > inst.y_max + tol) fail("position bounds", t);
    if (s.shortfall[t] < -tol || s.surplus[t] < -tol) fail("negative deviation", t);
    if (s.shortfall[t] < r.bids[t] - s.y[t] - tol) fail("uncovered shortfall", t);
    if (s.surplus[t] < s.y[t] - r.bids[t] - tol) fail("uncovered surplus", t);
    if (s.pv[t] < -tol || s.pv[t] > obs.pv[t] + tol) fail("pv exceeds available", t);
    if (s.wind[t] < -tol || s.wind[t] > obs.wind[t] + tol) fail("wind exceeds available", t);
    if (s.charge[t] < -tol || s.charge[t] > plim + tol) fail("charge power", t);
    if (s.discharge[t] < -tol || s.discharge[t] > plim + tol) fail("discharge power", t);
    if (std::min(s.charge[t], s.discharge[t]) > tol) fail("simultaneous charge and discharge", t);
    const double balance = s.pv[t] + s.wind[t] + s.discharge[t] - s.charge[t] - obs.load[t];
    if (std::abs(s.y[t] - balance) > tol) fail("energy balance", t);
    const double soc = prev + inst.dt * (bt.eta_cha * s.charge[t] - s.discharge[t] / bt.eta_dis);
    if (std::abs(s.soc[t] - soc) > tol) fail("storage dynamics", t);
    if (s.soc[t] < bt.s_min - tol || s.soc[t] > bt.s_max + tol) fail("storage bounds", t);
    prev = s.soc[t];
    penalty += inst.dt * (inst.short_price[t] * s.shortfall[t] + inst.long_price[t] * s.surplus[t]);
  }
  if (std::abs(s.soc[T - 1] - bt.s_end) > tol) fail("terminal storage state", T - 1);
  const double scale = std::max(1.0, std::abs(penalty));
  if (std::abs(s.penalty - penalty) > tol * scale) fail("penalty accounting", -1);
  const double profit = inst.dt * inst.prices.dot(r.bids) - penalty;
  if (std::abs(r.net_profit - profit) > tol * std::max(1.0, std::abs(profit)))
    fail("profit accounting", -1);
  if (std::abs(r.objective - r.net_profit) > tol * std::max(1.0, std::abs(profit)))
    fail("objective accounting", -1);
}

PlanResult plan_bids(const BiddingInstance& inst, const ScenarioSet& scen,
                     const PlanOptions& opt) {
  validate(inst);
  require_scenarios(scen, inst);
  if (opt.max_rounds < 1) throw std::invalid_argument("planner needs at least one round");
  return opt.exact ? plan_exact(inst, scen, opt) : plan_relaxed(inst, scen, opt);
}

CampaignResult simulate_campaign(const std::vector<std::string>& models,
                                 const std::vector<CampaignDay>& days,
                                 const PlanOptions& opt, int threads) {
  const int K = static_cast<int>(models.size());
  const int D = static_cast<int>(days.size());
  if (K == 0) throw std::invalid_argument("campaign needs at least one model");
  if (D == 0) throw std::invalid_argument("campaign needs at least one day");

  std::vector<std::string> gaps;
  for (const CampaignDay& day : days) {
    const int T = static_cast<int>(day.prices.size());
    if (T < 1 || day.observed.pv.size() != T || day.observed.wind.size() != T ||
        day.observed.load.size() != T) {
      gaps.push_back(day.label + ": malformed prices or observation");
      continue;
    }
    for (int m = 0; m < K; ++m) {
      if (m >= static_cast<int>(day.scenarios.size())) {
        gaps.push_back(day.label + "/" + models[m] + ": missing scenarios");
        continue;
      }
      const ScenarioSet& sc = day.scenarios[m];
      if (sc.count() < 1 || sc.wind.rows() != sc.count() || sc.load.rows() != sc.count() ||
          sc.pv.cols() != T || sc.wind.cols() != T || sc.load.cols() != T)
        gaps.push_back(day.label + "/" + models[m] + ": malformed scenarios");
    }
  }
  if (!gaps.empty()) {
    std::ostringstream msg;
    msg << "campaign input incomplete:";
    for (const std::string& g : gaps) msg << "\n  " << g;
    throw std::invalid_argument(msg.str());
  }

  Eigen::MatrixXd profit(D, K);
  std::vector<double> oracle_daily(D);

  int n_threads = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::max(1, std::min(n_threads, D));
  std::vector<std::exception_ptr> errors(n_threads);
  auto worker = [&](int id) {
    try {
      for (int d = id; d < D; d += n_threads) {
        const CampaignDay& day = days[d];
        const BiddingInstance inst = market_instance(day.prices, 1.0);
        oracle_daily[d] = oracle(day.observed, inst).net_profit;
        for (int m = 0; m < K; ++m) {
          const PlanResult plan = plan_bids(inst, day.scenarios[m], opt);
          profit(d, m) = dispatch(plan.bids, day.observed, inst).net_profit;
        }
      }
    } catch (...) {
      errors[id] = std::current_exception();
    }
  };
  if (n_threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker, i);
    for (std::thread& th : pool) th.join();
  }
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);

  CampaignResult out;
  out.models.resize(K);
  for (int m = 0; m < K; ++m) {
    ModelOutcome& mo = out.models[m];
    mo.model = models[m];
    mo.daily_profit.resize(D);
    mo.rank_count.assign(K, 0);
    mo.rank_percent.assign(K, 0.0);
    for (int d = 0; d < D; ++d) {
      mo.daily_profit[d] = profit(d, m);
      mo.total_profit += profit(d, m);
    }
  }
  std::vector<int> order(K);
  for (int d = 0; d < D; ++d) {
    for (int m = 0; m < K; ++m) order[m] = m;
    // stable: ties keep model order
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return profit(d, a) > profit(d, b); });
    for (int r = 0; r < K; ++r) ++out.models[order[r]].rank_count[r];
  }
  for (int m = 0; m < K; ++m) {
    double cum = 0.0;
    for (int r = 0; r < K; ++r) {
      cum += out.models[m].rank_count[r];
      out.models[m].rank_percent[r] = 100.0 * cum / D;
    }
  }
  out.oracle_daily = oracle_daily;
  for (double v : oracle_daily) out.oracle_total += v;
  return out;
}

Eigen::VectorXd load_price_csv(const std::string& path) {
  const csv::Table tb = csv::read_file(path);
  const int hc = tb.column("hour");
  const int pc = tb.column("price_eur_mwh");
  if (hc < 0 || pc < 0)
    throw std::runtime_error(path + ": expected columns hour,price_eur_mwh");
  if (tb.rows.empty()) throw std::runtime_error(path + ": no price rows");
  Eigen::VectorXd out(tb.rows.size());
  const size_t width = static_cast<size_t>(std::max(hc, pc)) + 1;
  for (size_t i = 0; i < tb.rows.size(); ++i) {
    std::ostringstream ctx;
    ctx << path << " row " << i + 1;
    if (tb.rows[i].size() < width) throw std::runtime_error(ctx.str() + ": short row");
    if (csv::to_long(tb.rows[i][hc], ctx.str()) != static_cast<long>(i))
      throw std::runtime_error(path + ": hours must run 0.." + std::to_string(tb.rows.size() - 1));
    out[i] = csv::to_double(tb.rows[i][pc], ctx.str());
  }
  return out;
}

}  // namespace scengen::value
