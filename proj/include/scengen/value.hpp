#pragma once
// Scenario-based day-ahead bidding: two-stage stochastic planner (first-stage
// bids, recourse dispatch against each scenario), realized-day dispatch,
// perfect-foresight benchmark, and the multi-day profit campaign. Everything
// here is deterministic; all optimization reduces to lp::solve.

#include "scengen/lp.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace scengen::value {

// Energy storage attached to the portfolio. Power in MW, capacity in MWh.
// The charge/discharge power limit is half the capacity: a full swing in
// two hours.
struct Battery {
  double s_min = 0.0;
  double s_max = 1.0;
  double eta_cha = 0.95;
  double eta_dis = 0.95;
  double s_ini = 0.0;
  double s_end = 0.0;
  double power_limit() const { return 0.5 * s_max; }
};

// Equiprobable joint scenarios, one row per scenario, one column per period.
struct ScenarioSet {
  Eigen::MatrixXd pv;
  Eigen::MatrixXd wind;
  Eigen::MatrixXd load;
  int count() const { return static_cast<int>(pv.rows()); }
  int periods() const { return static_cast<int>(pv.cols()); }
};

// Realized production/consumption for one day.
struct Observation {
  Eigen::VectorXd pv, wind, load;
};

// Market and portfolio parameters for one trading day. Prices in EUR/MWh,
// short_price is charged per MWh of shortfall (delivery below the bid),
// long_price per MWh of surplus.
struct BiddingInstance {
  int T = 24;
  double dt = 1.0;  // hours per period
  Eigen::VectorXd prices;
  Eigen::VectorXd short_price;
  Eigen::VectorXd long_price;
  Battery battery;
  double e_min = -3.5, e_max = 3.5;  // bid bounds, MW
  double y_min = -3.5, y_max = 3.5;  // net position bounds, MW
};

// Instance with both imbalance prices set to twice the day-ahead price and
// default battery / bounds.
BiddingInstance market_instance(const Eigen::VectorXd& prices, double dt = 1.0);

// throws std::invalid_argument on inconsistent sizes, negative imbalance
// prices, or a battery whose initial state lies outside its capacity
void validate(const BiddingInstance& inst);

// One scenario's recourse: average MW per period except soc (MWh at end of
// period). penalty = sum_t dt * (short_price * shortfall + long_price *
// surplus), in EUR.
struct StagePlan {
  Eigen::VectorXd y, shortfall, surplus, pv, wind, charge, discharge, soc;
  double penalty = 0.0;
};

struct DispatchResult {
  Eigen::VectorXd bids;
  StagePlan stage;
  double objective = 0.0;   // EUR: sum_t dt * prices_t * bids_t - penalty
  double net_profit = 0.0;  // equal to objective for a realized day
  double repair_gap = 0.0;  // EUR lost separating simultaneous charge/discharge
};

// Recourse against the realized day for fixed bids. The linear relaxation
// lets the battery charge and discharge at once; when that happens the
// smaller side is forced to zero and the stage is re-solved, with the cost
// increase reported as repair_gap.
DispatchResult dispatch(const Eigen::VectorXd& bids, const Observation& obs,
                        const BiddingInstance& inst);

// Perfect-foresight benchmark: bids and recourse optimized jointly against
// the realized day. Upper-bounds every dispatch profit on the same day.
DispatchResult oracle(const Observation& obs, const BiddingInstance& inst);

// throws std::runtime_error naming the first violated dispatch invariant:
// bounds, energy balance, storage dynamics, terminal state, exclusivity,
// deviation definitions, profit accounting
void check_dispatch(const DispatchResult& r, const Observation& obs,
                    const BiddingInstance& inst, double tol = 1e-6);

// Extensive-form planner LP over all scenarios. Columns: bids e(T), then per
// scenario a block of 8T recourse variables in the order y, shortfall,
// surplus, pv, wind, charge, discharge, soc (T each). Rows per scenario:
// shortfall definition (T), surplus definition (T), charge+discharge power
// cap (T), energy balance (T, eq), storage dynamics (T, eq). Minimizes the
// negated expected profit.
lp::Problem planner_problem(const BiddingInstance& inst, const ScenarioSet& scen);

struct PlanOptions {
  bool exact = false;        // branch on charge/discharge exclusivity
  int max_binaries = 8;      // exact refuses instances with more period-scenario pairs
  int max_rounds = 120;      // cutting-plane rounds for the relaxed planner
  int extensive_limit = 600; // column budget below which the extensive form is solved directly
  double tol = 1e-7;
};

struct PlanResult {
  Eigen::VectorXd bids;
  double objective = 0.0;  // expected EUR of bids under the scenario set
  int rounds = 0;          // cutting-plane rounds or branch-and-bound nodes
  double bound_gap = 0.0;  // remaining optimistic bound minus objective
};

// First-stage bids maximizing expected profit over the scenario set. The
// default solves the linear relaxation by multi-cut outer approximation
// (cuts from recourse duals); exact=true runs a small branch-and-bound on
// the extensive form instead and is limited to max_binaries pairs.
PlanResult plan_bids(const BiddingInstance& inst, const ScenarioSet& scen,
                     const PlanOptions& opt = {});

// One simulated trading day: market prices, the realized outcome, and one
// scenario set per competing model (same order as the model list).
struct CampaignDay {
  std::string label;
  Eigen::VectorXd prices;
  Observation observed;
  std::vector<ScenarioSet> scenarios;
};

struct ModelOutcome {
  std::string model;
  double total_profit = 0.0;
  std::vector<double> daily_profit;
  std::vector<int> rank_count;       // [r] = days finishing in place r+1
  std::vector<double> rank_percent;  // cumulative share of days at rank <= r+1
};

struct CampaignResult {
  std::vector<ModelOutcome> models;
  std::vector<double> oracle_daily;
  double oracle_total = 0.0;
};

// Plan + dispatch every model on every day, rank models per day by realized
// profit (ties broken by model order), and benchmark against the oracle.
// Days are independent and mapped over a thread pool (threads = 0 picks the
// hardware count); results do not depend on the schedule. Throws
// std::invalid_argument listing every (day, model) with missing or
// malformed scenarios before any solving starts.
CampaignResult simulate_campaign(const std::vector<std::string>& models,
                                 const std::vector<CampaignDay>& days,
                                 const PlanOptions& opt = {}, int threads = 0);

// Reads a `hour,price_eur_mwh` CSV; hours must run 0..n-1 in order.
Eigen::VectorXd load_price_csv(const std::string& path);

}  // namespace scengen::value
