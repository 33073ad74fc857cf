#pragma once
// Scenario quality metrics: univariate (CRPS, quantile score, reliability),
// multivariate (energy and variogram scores, correlation matrices), the
// classifier two-sample test, Diebold-Mariano significance tests, and the
// RAND baseline sampler.
//
// All estimators take one day's scenario matrix (M x T, one scenario per
// row) against the day's observation vector and return natural units;
// report-layer scaling happens elsewhere.

#include "scengen/forest.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <utility>
#include <vector>

namespace scengen::metrics {

// per-marginal CRPS via the rank (Gini) form of the sample estimator:
// (1/M) sum_i |s_i - x| - (1/(2 M^2)) sum_ij |s_i - s_j|
Eigen::VectorXd crps(const Eigen::MatrixXd& scenarios, const Eigen::VectorXd& obs);

double energy_score(const Eigen::MatrixXd& scenarios, const Eigen::VectorXd& obs);

// sum over ordered pairs (k, k') of (|x_k - x_k'|^gamma - mean_i |s_ik - s_ik'|^gamma)^2,
// optionally weighted; weights default to all ones
double variogram_score(const Eigen::MatrixXd& scenarios, const Eigen::VectorXd& obs,
                       double gamma = 0.5, const Eigen::MatrixXd* weights = nullptr);

// rows are quantile levels 1%..99%, columns marginals; linear interpolation
// between closest order statistics
Eigen::MatrixXd empirical_quantiles(const Eigen::MatrixXd& scenarios);

// pinball loss rho_q(x, q_hat) = q(x - q_hat) if x >= q_hat else (1-q)(q_hat - x)
double pinball(double q, double quantile_value, double obs);

// per-level quantile score averaged over marginals; quantiles is 99 x T
Eigen::VectorXd quantile_score(const Eigen::MatrixXd& quantiles, const Eigen::VectorXd& obs);

struct Reliability {
  Eigen::VectorXd nominal;   // 99 levels, 0.01..0.99
  Eigen::VectorXd observed;  // empirical proportion obs <= quantile
  double mae_r = 0;          // mean |observed - nominal| x 100
};

// quantiles_per_day: one 99 x T matrix per day; obs: days x T
Reliability reliability(const std::vector<Eigen::MatrixXd>& quantiles_per_day,
                        const Eigen::MatrixXd& obs);

struct CorrelationResult {
  Eigen::MatrixXd rho;       // T x T Pearson coefficients across scenarios
  bool degenerate = false;   // some column had zero variance (entries forced 0)
};

CorrelationResult correlation_matrix(const Eigen::MatrixXd& scenarios);

struct DmResult {
  double statistic = 0;
  double p_value = 1;
  bool degenerate = false;  // zero-variance loss differential
};

// per-day scalar losses for models g and h; two-sided p from the normal limit
DmResult dm_test(const Eigen::VectorXd& errors_g, const Eigen::VectorXd& errors_h);

// per-day loss vectors (days x K); reduces each day by the 1-norm first
DmResult dm_test_multivariate(const Eigen::MatrixXd& errors_g, const Eigen::MatrixXd& errors_h);

// M scenarios for one day drawn with replacement from the day's own split
Eigen::MatrixXd rand_scenarios(const Eigen::MatrixXd& split_obs, int M, nn::Rng& rng);

struct C2stOptions {
  forest::ForestOptions forest;
  bool keep_roc = true;
};

struct C2stResult {
  double auc = 0.5;
  std::vector<std::pair<double, double>> roc;
};

// one discriminator round: train on generated-vs-observed rows of the learning
// split, score the test split; features are the sample prepended to its
// context row. Both splits must pair each generated row with an observed one.
C2stResult c2st_single(const Eigen::MatrixXd& gen_ls, const Eigen::MatrixXd& obs_ls,
                       const Eigen::MatrixXd& ctx_ls, const Eigen::MatrixXd& gen_ts,
                       const Eigen::MatrixXd& obs_ts, const Eigen::MatrixXd& ctx_ts,
                       const C2stOptions& opt);

}  // namespace scengen::metrics
