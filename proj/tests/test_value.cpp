#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "scengen/csv.hpp"
#include "scengen/lp.hpp"
#include "scengen/value.hpp"

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

using namespace scengen;
using namespace scengen::value;
namespace fs = std::filesystem;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// constant-price instance; s_max = 0 removes the battery
BiddingInstance flat_instance(int T, double price, double imbalance, double s_max) {
  BiddingInstance inst;
  inst.T = T;
  inst.prices = Eigen::VectorXd::Constant(T, price);
  inst.short_price = Eigen::VectorXd::Constant(T, imbalance);
  inst.long_price = Eigen::VectorXd::Constant(T, imbalance);
  inst.battery.s_max = s_max;
  return inst;
}

ScenarioSet single_scenario(const Eigen::VectorXd& pv, const Eigen::VectorXd& wind,
                            const Eigen::VectorXd& load) {
  ScenarioSet s;
  s.pv = pv.transpose();
  s.wind = wind.transpose();
  s.load = load.transpose();
  return s;
}

Observation observe(const Eigen::VectorXd& pv, const Eigen::VectorXd& wind,
                    const Eigen::VectorXd& load) {
  return Observation{pv, wind, load};
}

// 3-period price spread: free solar around noon, expensive evening
BiddingInstance arbitrage_instance() {
  BiddingInstance inst;
  inst.T = 3;
  inst.prices = vec({10.0, 5.0, 50.0});
  inst.short_price = 2.0 * inst.prices;
  inst.long_price = 2.0 * inst.prices;
  return inst;
}

ScenarioSet arbitrage_scenario() {
  return single_scenario(vec({0.2, 0.5, 0.0}), Eigen::VectorXd::Zero(3),
                         Eigen::VectorXd::Zero(3));
}

// stored energy must be drained by the end of the day but exports are barred
// (e <= 0, y >= 0) and surplus is expensive: the relaxation prefers wasting
// energy by charging and discharging at once
BiddingInstance stranded_instance() {
  BiddingInstance inst;
  inst.T = 2;
  inst.prices = vec({1.0, 1.0});
  inst.short_price = vec({1000.0, 1000.0});
  inst.long_price = vec({1000.0, 1000.0});
  inst.battery.s_ini = 0.8;
  inst.e_max = 0.0;
  inst.y_min = 0.0;
  return inst;
}

// best profit over every charge/discharge on-off pattern, via the extensive form
double enumerate_best(const BiddingInstance& inst, const ScenarioSet& scen) {
  const lp::Problem base = planner_problem(inst, scen);
  const int T = inst.T;
  const int pairs = T * scen.count();
  REQUIRE(pairs <= 8);
  double best = -lp::kInf;
  for (int mask = 0; mask < (1 << pairs); ++mask) {
    lp::Problem p = base;
    for (int k = 0; k < pairs; ++k) {
      const int w = k / T, t = k % T;
      const int cha = T + (w * 8 + 5) * T + t;
      const int dis = T + (w * 8 + 6) * T + t;
      p.ub[(mask >> k) & 1 ? dis : cha] = 0.0;
    }
    const lp::Solution sol = lp::solve(p);
    if (sol.status == lp::Status::optimal) best = std::max(best, -sol.objective);
  }
  return best;
}

}  // namespace

TEST_CASE("market instance construction and validation") {
  const Eigen::VectorXd pi = vec({40.0, 55.0, 35.0});
  const BiddingInstance inst = market_instance(pi);
  CHECK(inst.T == 3);
  CHECK(inst.short_price.isApprox(2.0 * pi));
  CHECK(inst.long_price.isApprox(2.0 * pi));
  CHECK(inst.battery.s_max == doctest::Approx(1.0));
  CHECK(inst.battery.power_limit() == doctest::Approx(0.5));
  CHECK(inst.e_max == doctest::Approx(3.5));

  BiddingInstance bad = inst;
  bad.short_price[1] = -1.0;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad = inst;
  bad.battery.s_ini = 2.0;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad = inst;
  bad.e_min = 1.0;
  bad.e_max = -1.0;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad = inst;
  bad.prices = vec({40.0, 55.0});
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad = inst;
  bad.dt = 0.0;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  CHECK_THROWS_AS(market_instance(vec({40.0, -5.0})), std::invalid_argument);
}

TEST_CASE("price file loading") {
  const fs::path dir = fs::temp_directory_path() / "scengen_value_test";
  fs::create_directories(dir);
  const std::string path = (dir / "prices.csv").string();
  csv::write_file(path, {}, {"hour", "price_eur_mwh"},
                  {{"0", "41.5"}, {"1", "39.25"}, {"2", "44.0"}});
  const Eigen::VectorXd p = load_price_csv(path);
  REQUIRE(p.size() == 3);
  CHECK(p[1] == doctest::Approx(39.25));

  csv::write_file(path, {}, {"hour", "price_eur_mwh"}, {{"1", "41.5"}});
  CHECK_THROWS_AS(load_price_csv(path), std::runtime_error);
  csv::write_file(path, {}, {"hour", "price"}, {{"0", "41.5"}});
  CHECK_THROWS_AS(load_price_csv(path), std::runtime_error);

  const Eigen::VectorXd bundled = load_price_csv(std::string(SCENGEN_DATA_DIR) +
                                                 "/day_ahead_prices.csv");
  REQUIRE(bundled.size() == 24);
  CHECK(bundled.minCoeff() > 0.0);
  CHECK(bundled[18] == doctest::Approx(66.8));
}

TEST_CASE("planner problem dimensions and zero battery") {
  BiddingInstance inst = flat_instance(2, 50.0, 100.0, 1.0);
  ScenarioSet scen = single_scenario(vec({0.3, 0.1}), vec({0.2, 0.2}), vec({0.5, 0.6}));
  lp::Problem p = planner_problem(inst, scen);
  CHECK(p.c.size() == 2 + 8 * 2);  // bids plus one block of 8 recourse groups
  CHECK(p.A.rows() == 5 * 2);

  ScenarioSet three = scen;
  three.pv = scen.pv.replicate(3, 1);
  three.wind = scen.wind.replicate(3, 1);
  three.load = scen.load.replicate(3, 1);
  p = planner_problem(inst, three);
  CHECK(p.c.size() == 2 + 3 * 8 * 2);
  CHECK(p.A.rows() == 3 * 5 * 2);

  ScenarioSet ragged = scen;
  ragged.wind = Eigen::MatrixXd::Zero(2, 2);
  CHECK_THROWS_AS(planner_problem(inst, ragged), std::invalid_argument);

  // no battery: charge and discharge are pinned to zero
  inst.battery.s_max = 0.0;
  const PlanResult plan = plan_bids(inst, scen, {});
  const DispatchResult disp =
      dispatch(plan.bids, observe(vec({0.3, 0.1}), vec({0.2, 0.2}), vec({0.5, 0.6})), inst);
  CHECK(disp.stage.charge.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  CHECK(disp.stage.discharge.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("single scenario load must be bought back") {
  // load 1 MW all day, nothing else: the only sensible bid is e = -1, paying
  // 24 * 50 EUR; any other bid adds imbalance at twice the price
  const int T = 24;
  BiddingInstance inst = flat_instance(T, 50.0, 100.0, 0.0);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(T);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(T);
  const ScenarioSet scen = single_scenario(zero, zero, ones);
  const Observation obs = observe(zero, zero, ones);

  const PlanResult plan = plan_bids(inst, scen, {});
  CHECK(plan.objective == doctest::Approx(-1200.0).epsilon(1e-9));
  CHECK((plan.bids.array() + 1.0).abs().maxCoeff() < 1e-6);

  PlanOptions exact;
  exact.exact = true;
  const PlanResult milp = plan_bids(inst, scen, exact);
  CHECK(milp.objective == doctest::Approx(-1200.0).epsilon(1e-9));
  CHECK(milp.bound_gap == 0.0);

  // with the realized day equal to the planning scenario the three views agree
  const DispatchResult disp = dispatch(plan.bids, obs, inst);
  CHECK(disp.net_profit == doctest::Approx(plan.objective).epsilon(1e-9));
  const DispatchResult best = oracle(obs, inst);
  CHECK(best.net_profit == doctest::Approx(plan.objective).epsilon(1e-9));
  check_dispatch(disp, obs, inst);
  check_dispatch(best, obs, inst);
}

TEST_CASE("fixed bids pay the shortfall penalty") {
  // e = 0 while the position is -1 every period: short 1 MW at 100 EUR/MWh
  const int T = 24;
  const BiddingInstance inst = flat_instance(T, 50.0, 100.0, 0.0);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(T);
  const Observation obs = observe(zero, zero, Eigen::VectorXd::Ones(T));

  const DispatchResult disp = dispatch(zero, obs, inst);
  CHECK(disp.stage.penalty == doctest::Approx(2400.0).epsilon(1e-12));
  CHECK(disp.net_profit == doctest::Approx(-2400.0).epsilon(1e-12));
  CHECK((disp.stage.shortfall.array() - 1.0).abs().maxCoeff() < 1e-9);
  CHECK(disp.stage.surplus.cwiseAbs().maxCoeff() < 1e-9);
  CHECK(disp.repair_gap == doctest::Approx(0.0));
  check_dispatch(disp, obs, inst);

  CHECK_THROWS_AS(dispatch(Eigen::VectorXd::Constant(T, 9.0), obs, inst), std::invalid_argument);
  CHECK_THROWS_AS(dispatch(Eigen::VectorXd::Zero(T - 1), obs, inst), std::invalid_argument);
}

TEST_CASE("idle portfolio earns nothing") {
  const BiddingInstance inst = flat_instance(6, 50.0, 100.0, 1.0);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(6);
  const Observation obs = observe(zero, zero, zero);
  const DispatchResult best = oracle(obs, inst);
  CHECK(best.net_profit == doctest::Approx(0.0));
  CHECK(best.bids.cwiseAbs().maxCoeff() < 1e-9);
  CHECK(best.stage.penalty == doctest::Approx(0.0));
  check_dispatch(best, obs, inst);
}

TEST_CASE("battery arbitrage matches exhaustive enumeration") {
  // charge from free solar, sell the stored energy into the evening price
  const BiddingInstance inst = arbitrage_instance();
  const ScenarioSet scen = arbitrage_scenario();

  const double brute = enumerate_best(inst, scen);
  CHECK(brute == doctest::Approx(26.459833795014).epsilon(1e-9));

  PlanOptions opt;
  opt.exact = true;
  const PlanResult milp = plan_bids(inst, scen, opt);
  CHECK(milp.objective == doctest::Approx(brute).epsilon(1e-9));
  CHECK(milp.bids[2] == doctest::Approx(0.5).epsilon(1e-6));

  // the relaxation is tight here: wasting energy never pays
  const PlanResult relaxed = plan_bids(inst, scen, {});
  CHECK(relaxed.objective == doctest::Approx(brute).epsilon(1e-7));

  const Observation obs = observe(vec({0.2, 0.5, 0.0}), Eigen::VectorXd::Zero(3),
                                  Eigen::VectorXd::Zero(3));
  const DispatchResult disp = dispatch(milp.bids, obs, inst);
  CHECK(disp.net_profit == doctest::Approx(milp.objective).epsilon(1e-7));
  check_dispatch(disp, obs, inst);
  CHECK(oracle(obs, inst).net_profit >= disp.net_profit - 1e-9);
}

TEST_CASE("branch and bound beats the relaxation on stranded energy") {
  const BiddingInstance inst = stranded_instance();
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
  const ScenarioSet scen = single_scenario(zero, zero, zero);

  const double brute = enumerate_best(inst, scen);
  CHECK(brute == doctest::Approx(-760.0).epsilon(1e-9));

  PlanOptions opt;
  opt.exact = true;
  const PlanResult milp = plan_bids(inst, scen, opt);
  CHECK(milp.objective == doctest::Approx(brute).epsilon(1e-9));
  CHECK(milp.rounds > 1);  // the root relaxation wastes energy, so it branched

  const PlanResult relaxed = plan_bids(inst, scen, {});
  CHECK(relaxed.objective == doctest::Approx(-747.700394218134).epsilon(1e-9));
  CHECK(relaxed.objective >= milp.objective);

  // capability guard: one period-scenario pair over the limit
  PlanOptions small = opt;
  small.max_binaries = 1;
  CHECK_THROWS_WITH_AS(plan_bids(inst, scen, small),
                       doctest::Contains("charge/discharge pairs"), std::runtime_error);
}

TEST_CASE("dispatch repairs simultaneous charge and discharge") {
  const BiddingInstance inst = stranded_instance();
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
  const Observation obs = observe(zero, zero, zero);

  const DispatchResult disp = dispatch(zero, obs, inst);
  CHECK(disp.stage.penalty == doctest::Approx(760.0).epsilon(1e-9));
  CHECK(disp.net_profit == doctest::Approx(-760.0).epsilon(1e-9));
  CHECK(disp.repair_gap == doctest::Approx(12.299605781866).epsilon(1e-6));
  for (int t = 0; t < 2; ++t)
    CHECK(std::min(disp.stage.charge[t], disp.stage.discharge[t]) <= 1e-7);
  check_dispatch(disp, obs, inst);
}

TEST_CASE("cutting planes match the extensive form") {
  // multi-scenario battery instance solved both ways
  const int T = 4;
  BiddingInstance inst;
  inst.T = T;
  inst.prices = vec({30.0, 20.0, 60.0, 45.0});
  inst.short_price = 2.0 * inst.prices;
  inst.long_price = 2.0 * inst.prices;

  ScenarioSet scen;
  scen.pv.resize(3, T);
  scen.wind.resize(3, T);
  scen.load.resize(3, T);
  for (int w = 0; w < 3; ++w)
    for (int t = 0; t < T; ++t) {
      scen.pv(w, t) = std::max(0.0, 0.4 * std::sin(1.0 + t) + 0.1 * w);
      scen.wind(w, t) = 0.3 + 0.2 * std::cos(0.8 * t + w);
      scen.load(w, t) = 0.7 + 0.1 * std::sin(0.5 * t - w);
    }

  const lp::Problem whole = planner_problem(inst, scen);
  const lp::Solution direct = lp::solve(whole);
  REQUIRE(direct.status == lp::Status::optimal);

  PlanOptions opt;
  opt.extensive_limit = 0;  // force the decomposition
  const PlanResult plan = plan_bids(inst, scen, opt);
  const double scale = std::max(1.0, std::abs(direct.objective));
  CHECK(std::abs(plan.objective - (-direct.objective)) <= 1e-6 * scale);
  CHECK(plan.bound_gap <= 1e-5 * scale);
  CHECK(plan.rounds > 1);
  CHECK(plan.bids.minCoeff() >= inst.e_min - 1e-9);
  CHECK(plan.bids.maxCoeff() <= inst.e_max + 1e-9);

  // expected profit of the returned bids never beats the per-scenario optima
  double oracle_mean = 0.0;
  for (int w = 0; w < 3; ++w) {
    const Observation one = observe(scen.pv.row(w), scen.wind.row(w), scen.load.row(w));
    oracle_mean += oracle(one, inst).net_profit / 3.0;
  }
  CHECK(plan.objective <= oracle_mean + 1e-6 * scale);

  // a one-round budget still returns the evaluated incumbent with its gap
  PlanOptions one_round = opt;
  one_round.max_rounds = 1;
  const PlanResult coarse = plan_bids(inst, scen, one_round);
  CHECK(coarse.rounds == 1);
  CHECK(coarse.objective <= plan.objective + 1e-9);
  CHECK(coarse.bound_gap >= -1e-9);
}

TEST_CASE("extra scenarios cannot raise the optimism bound") {
  // adding the realized day as one more equiprobable scenario: the planner's
  // expected objective, measured against the per-scenario ideal, only drops
  PlanOptions opt;
  opt.exact = true;
  for (int k = 0; k < 4; ++k) {
    BiddingInstance inst;
    inst.T = 2;
    inst.prices = vec({30.0 + 5.0 * k, 55.0 - 3.0 * k});
    inst.short_price = 2.0 * inst.prices;
    inst.long_price = 2.0 * inst.prices;

    ScenarioSet scen;
    scen.pv.resize(2, 2);
    scen.wind.resize(2, 2);
    scen.load.resize(2, 2);
    for (int w = 0; w < 2; ++w)
      for (int t = 0; t < 2; ++t) {
        scen.pv(w, t) = 0.1 * (w + 1) + 0.05 * t + 0.02 * k;
        scen.wind(w, t) = 0.3 - 0.1 * w + 0.04 * t;
        scen.load(w, t) = 0.6 + 0.1 * t - 0.03 * k;
      }
    const Eigen::VectorXd opv = vec({0.25 + 0.01 * k, 0.15});
    const Eigen::VectorXd ownd = vec({0.2, 0.35 - 0.02 * k});
    const Eigen::VectorXd old = vec({0.7, 0.5 + 0.05 * k});

    ScenarioSet aug = scen;
    aug.pv.conservativeResize(3, 2);
    aug.wind.conservativeResize(3, 2);
    aug.load.conservativeResize(3, 2);
    aug.pv.row(2) = opv.transpose();
    aug.wind.row(2) = ownd.transpose();
    aug.load.row(2) = old.transpose();

    const double v2 = plan_bids(inst, scen, opt).objective;
    const double v3 = plan_bids(inst, aug, opt).objective;
    const double ideal = plan_bids(inst, single_scenario(opv, ownd, old), opt).objective;
    CHECK(3.0 * v3 <= 2.0 * v2 + ideal + 1e-7 * std::max(1.0, std::abs(v2)));
  }
}

TEST_CASE("campaign ranks models and reports the ideal benchmark") {
  const int T = 6;
  const std::vector<std::string> models = {"close", "noisy", "copy"};
  std::vector<CampaignDay> days;
  for (int d = 0; d < 4; ++d) {
    CampaignDay day;
    day.label = "day" + std::to_string(d);
    day.prices = Eigen::VectorXd::Constant(T, 45.0) +
                 10.0 * Eigen::VectorXd::LinSpaced(T, -1.0, 1.0) * std::cos(0.4 * d);
    Eigen::VectorXd pv(T), wind(T), load(T);
    for (int t = 0; t < T; ++t) {
      pv[t] = std::max(0.0, 0.5 * std::sin(0.5 * t + 0.2 * d));
      wind[t] = 0.4 + 0.2 * std::cos(0.7 * t + d);
      load[t] = 0.9 + 0.2 * std::sin(0.3 * t - 0.5 * d);
    }
    day.observed = observe(pv, wind, load);

    ScenarioSet close;
    close.pv.resize(3, T);
    close.wind.resize(3, T);
    close.load.resize(3, T);
    for (int w = 0; w < 3; ++w) {
      const double off = 0.02 * (w - 1);
      close.pv.row(w) = (pv.array() + off).max(0.0).transpose();
      close.wind.row(w) = (wind.array() + off).max(0.0).transpose();
      close.load.row(w) = (load.array() - off).max(0.0).transpose();
    }
    ScenarioSet noisy = close;
    noisy.pv.array() += 0.4;
    noisy.load.array() += 0.5;

    day.scenarios = {close, noisy, close};
    days.push_back(day);
  }

  const CampaignResult res = simulate_campaign(models, days, {}, 1);
  REQUIRE(res.models.size() == 3);
  for (const ModelOutcome& mo : res.models) {
    REQUIRE(mo.daily_profit.size() == 4);
    double total = 0.0;
    for (double v : mo.daily_profit) total += v;
    CHECK(mo.total_profit == doctest::Approx(total).epsilon(1e-12));
    CHECK(mo.rank_percent.back() == doctest::Approx(100.0));
  }
  // every rank is assigned exactly once per day
  for (int r = 0; r < 3; ++r) {
    int n = 0;
    for (const ModelOutcome& mo : res.models) n += mo.rank_count[r];
    CHECK(n == 4);
  }
  // identical scenarios give identical profits; ties keep the model order
  for (int d = 0; d < 4; ++d) {
    CHECK(res.models[0].daily_profit[d] == res.models[2].daily_profit[d]);
    CHECK(res.oracle_daily[d] >= res.models[0].daily_profit[d] - 1e-6);
    CHECK(res.oracle_daily[d] >= res.models[1].daily_profit[d] - 1e-6);
  }
  CHECK(res.models[2].rank_count[0] == 0);
  CHECK(res.oracle_total == doctest::Approx(res.oracle_daily[0] + res.oracle_daily[1] +
                                            res.oracle_daily[2] + res.oracle_daily[3]));

  // the parallel map is deterministic
  const CampaignResult par = simulate_campaign(models, days, {}, 3);
  for (int m = 0; m < 3; ++m)
    for (int d = 0; d < 4; ++d)
      CHECK(par.models[m].daily_profit[d] == res.models[m].daily_profit[d]);

  // missing and malformed scenario sets are reported together, by name
  std::vector<CampaignDay> broken = days;
  broken[1].scenarios.resize(1);
  broken[2].scenarios[0].wind.resize(3, T + 1);
  try {
    simulate_campaign(models, broken, {}, 1);
    FAIL("expected invalid_argument");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("day1/noisy: missing") != std::string::npos);
    CHECK(msg.find("day1/copy: missing") != std::string::npos);
    CHECK(msg.find("day2/close: malformed") != std::string::npos);
  }
}
