#include "scengen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace scengen::metrics {

namespace {

void check_day(const Eigen::MatrixXd& scenarios, const Eigen::VectorXd& obs) {
  if (scenarios.rows() < 1) throw std::invalid_argument("metrics: needs at least one scenario");
  if (scenarios.cols() != obs.size())
    throw std::invalid_argument("metrics: scenario/observation width mismatch");
}

}  // namespace

Eigen::VectorXd crps(const Eigen::MatrixXd& scenarios, const Eigen::VectorXd& obs) {
  check_day(scenarios, obs);
  const int M = static_cast<int>(scenarios.rows());
  const int T = static_cast<int>(scenarios.cols());
  Eigen::VectorXd out(T);
  std::vector<double> s(M);
  for (int k = 0; k < T; ++k) {
    for (int i = 0; i < M; ++i) s[i] = scenarios(i, k);
    std::sort(s.begin(), s.end());
    double mad = 0.0, gini = 0.0;
    for (int i = 0; i < M; ++i) {
      mad += std::abs(s[i] - obs[k]);
      // sum_ij |s_i - s_j| = 2 sum_k (2k - 1 - M) s_(k), k 1-based ascending
      gini += (2.0 * (i + 1) - 1.0 - M) * s[i];
    }
    out[k] = mad / M - gini / (static_cast<double>(M) * M);
  }
  return out;
}

double energy_score(const Eigen::MatrixXd& scenarios, const Eigen::VectorXd& obs) {
  check_day(scenarios, obs);
  const int M = static_cast<int>(scenarios.rows());
  double dist_obs = 0.0, dist_pair = 0.0;
  for (int i = 0; i < M; ++i) {
    dist_obs += (scenarios.row(i).transpose() - obs).norm();
    for (int j = i + 1; j < M; ++j) dist_pair += (scenarios.row(i) - scenarios.row(j)).norm();
  }
  return dist_obs / M - dist_pair / (static_cast<double>(M) * M);
}

double variogram_score(const Eigen::MatrixXd& scenarios, const Eigen::VectorXd& obs,
                       double gamma, const Eigen::MatrixXd* weights) {
  check_day(scenarios, obs);
  const int M = static_cast<int>(scenarios.rows());
  const int T = static_cast<int>(scenarios.cols());
  if (weights && (weights->rows() != T || weights->cols() != T))
    throw std::invalid_argument("variogram: weight matrix must be T x T");

  double acc = 0.0;
  for (int k = 0; k < T; ++k) {
    for (int kp = 0; kp < T; ++kp) {
      if (k == kp) continue;
      double fc = 0.0;
      for (int i = 0; i < M; ++i) fc += std::pow(std::abs(scenarios(i, k) - scenarios(i, kp)), gamma);
      fc /= M;
      const double ob = std::pow(std::abs(obs[k] - obs[kp]), gamma);
      const double w = weights ? (*weights)(k, kp) : 1.0;
      acc += w * (ob - fc) * (ob - fc);
    }
  }
  return acc;
}

Eigen::MatrixXd empirical_quantiles(const Eigen::MatrixXd& scenarios) {
  const int M = static_cast<int>(scenarios.rows());
  const int T = static_cast<int>(scenarios.cols());
  if (M < 1) throw std::invalid_argument("quantiles: needs at least one scenario");

  Eigen::MatrixXd out(99, T);
  std::vector<double> s(M);
  for (int k = 0; k < T; ++k) {
    for (int i = 0; i < M; ++i) s[i] = scenarios(i, k);
    std::sort(s.begin(), s.end());
    for (int q = 1; q <= 99; ++q) {
      // position (M-1) q among 0-based order statistics, linearly interpolated
      const double h = (M - 1) * (q / 100.0);
      const int lo = static_cast<int>(std::floor(h));
      const int hi = std::min(lo + 1, M - 1);
      out(q - 1, k) = s[lo] + (h - lo) * (s[hi] - s[lo]);
    }
  }
  return out;
}

double pinball(double q, double quantile_value, double obs) {
  return obs >= quantile_value ? q * (obs - quantile_value) : (1.0 - q) * (quantile_value - obs);
}

Eigen::VectorXd quantile_score(const Eigen::MatrixXd& quantiles, const Eigen::VectorXd& obs) {
  if (quantiles.rows() != 99) throw std::invalid_argument("quantile score: expects 99 levels");
  if (quantiles.cols() != obs.size())
    throw std::invalid_argument("quantile score: quantile/observation width mismatch");
  const int T = static_cast<int>(obs.size());
  Eigen::VectorXd out(99);
  for (int q = 1; q <= 99; ++q) {
    double acc = 0.0;
    for (int k = 0; k < T; ++k) acc += pinball(q / 100.0, quantiles(q - 1, k), obs[k]);
    out[q - 1] = acc / T;
  }
  return out;
}

Reliability reliability(const std::vector<Eigen::MatrixXd>& quantiles_per_day,
                        const Eigen::MatrixXd& obs) {
  const int days = static_cast<int>(obs.rows());
  const int T = static_cast<int>(obs.cols());
  if (static_cast<int>(quantiles_per_day.size()) != days)
    throw std::invalid_argument("reliability: day count mismatch");
  if (days == 0) throw std::invalid_argument("reliability: needs at least one day");
  for (const auto& Q : quantiles_per_day)
    if (Q.rows() != 99 || Q.cols() != T)
      throw std::invalid_argument("reliability: quantile matrix must be 99 x T");

  Reliability rel;
  rel.nominal = Eigen::VectorXd::LinSpaced(99, 0.01, 0.99);
  rel.observed = Eigen::VectorXd::Zero(99);
  for (int d = 0; d < days; ++d)
    for (int q = 0; q < 99; ++q)
      for (int k = 0; k < T; ++k)
        if (obs(d, k) <= quantiles_per_day[d](q, k)) rel.observed[q] += 1.0;
  rel.observed /= static_cast<double>(days) * T;
  rel.mae_r = (rel.observed - rel.nominal).cwiseAbs().mean() * 100.0;
  return rel;
}

CorrelationResult correlation_matrix(const Eigen::MatrixXd& scenarios) {
  const int M = static_cast<int>(scenarios.rows());
  const int T = static_cast<int>(scenarios.cols());
  if (M < 2) throw std::invalid_argument("correlation: needs at least two scenarios");

  Eigen::MatrixXd centered = scenarios.rowwise() - scenarios.colwise().mean();
  Eigen::VectorXd norm = centered.colwise().norm();

  CorrelationResult res;
  res.rho = Eigen::MatrixXd::Zero(T, T);
  for (int a = 0; a < T; ++a) {
    if (norm[a] < 1e-15) {
      res.degenerate = true;  // Pearson undefined, row/column forced to 0
      continue;
    }
    for (int b = 0; b < T; ++b) {
      if (norm[b] < 1e-15) continue;
      res.rho(a, b) = centered.col(a).dot(centered.col(b)) / (norm[a] * norm[b]);
    }
  }
  return res;
}

DmResult dm_test(const Eigen::VectorXd& errors_g, const Eigen::VectorXd& errors_h) {
  const int N = static_cast<int>(errors_g.size());
  if (errors_h.size() != N) throw std::invalid_argument("dm test: series length mismatch");
  if (N < 2) throw std::invalid_argument("dm test: needs at least two days");

  const Eigen::VectorXd d = errors_g - errors_h;
  const double mean = d.mean();
  const double var = (d.array() - mean).square().sum() / (N - 1);

  DmResult res;
  if (var <= 0.0) {
    res.degenerate = true;
    res.statistic = 0.0;
    res.p_value = 1.0;
    return res;
  }
  res.statistic = std::sqrt(static_cast<double>(N)) * mean / std::sqrt(var);
  res.p_value = std::erfc(std::abs(res.statistic) / std::sqrt(2.0));
  return res;
}

DmResult dm_test_multivariate(const Eigen::MatrixXd& errors_g, const Eigen::MatrixXd& errors_h) {
  if (errors_g.rows() != errors_h.rows() || errors_g.cols() != errors_h.cols())
    throw std::invalid_argument("dm test: error matrix shape mismatch");
  return dm_test(errors_g.cwiseAbs().rowwise().sum(), errors_h.cwiseAbs().rowwise().sum());
}

Eigen::MatrixXd rand_scenarios(const Eigen::MatrixXd& split_obs, int M, nn::Rng& rng) {
  if (split_obs.rows() == 0) throw std::invalid_argument("rand baseline: empty split");
  if (M < 1) throw std::invalid_argument("rand baseline: scenario count must be positive");
  Eigen::MatrixXd out(M, split_obs.cols());
  for (int i = 0; i < M; ++i)
    out.row(i) = split_obs.row(static_cast<Eigen::Index>(rng.uniform_int(split_obs.rows())));
  return out;
}

C2stResult c2st_single(const Eigen::MatrixXd& gen_ls, const Eigen::MatrixXd& obs_ls,
                       const Eigen::MatrixXd& ctx_ls, const Eigen::MatrixXd& gen_ts,
                       const Eigen::MatrixXd& obs_ts, const Eigen::MatrixXd& ctx_ts,
                       const C2stOptions& opt) {
  if (gen_ls.rows() != obs_ls.rows() || gen_ts.rows() != obs_ts.rows())
    throw std::invalid_argument("c2st: generated/observed class counts must match");
  if (ctx_ls.rows() != obs_ls.rows() || ctx_ts.rows() != obs_ts.rows())
    throw std::invalid_argument("c2st: context row count mismatch");
  if (gen_ls.cols() != obs_ls.cols() || gen_ts.cols() != obs_ts.cols() ||
      gen_ls.cols() != gen_ts.cols() || ctx_ls.cols() != ctx_ts.cols())
    throw std::invalid_argument("c2st: feature width mismatch");

  const int n_ls = static_cast<int>(obs_ls.rows());
  const int n_ts = static_cast<int>(obs_ts.rows());
  const int T = static_cast<int>(gen_ls.cols());
  const int C = static_cast<int>(ctx_ls.cols());

  Eigen::MatrixXd X_ls(2 * n_ls, T + C);
  X_ls << gen_ls, ctx_ls, obs_ls, ctx_ls;
  std::vector<int> y_ls(2 * n_ls, 0);
  std::fill(y_ls.begin() + n_ls, y_ls.end(), 1);

  Eigen::MatrixXd X_ts(2 * n_ts, T + C);
  X_ts << gen_ts, ctx_ts, obs_ts, ctx_ts;
  std::vector<int> y_ts(2 * n_ts, 0);
  std::fill(y_ts.begin() + n_ts, y_ts.end(), 1);

  forest::ExtraTrees et;
  et.fit(X_ls, y_ls, opt.forest);
  Eigen::VectorXd scores = et.predict_proba(X_ts);

  C2stResult res;
  res.auc = forest::auc_from_scores(scores, y_ts);
  if (opt.keep_roc) res.roc = forest::roc_points(scores, y_ts);
  return res;
}

}  // namespace scengen::metrics
