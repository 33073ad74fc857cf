#include "scengen/gan.hpp"

#include "scengen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace scengen::gan {

namespace {

constexpr double kDivergenceBound = 1e6;

void check_batch(const Eigen::MatrixXd& X, const Eigen::MatrixXd& C, int T, int c_dim) {
  if (X.cols() != T) throw std::invalid_argument("gan: target batch has wrong width");
  if (C.cols() != c_dim || C.rows() != X.rows())
    throw std::invalid_argument("gan: conditioning batch shape mismatch");
}

Eigen::MatrixXd hcat(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

}  // namespace

WganGp::WganGp(GanConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.T <= 0 || cfg_.latent_dim <= 0 || cfg_.c_dim < 0)
    throw std::invalid_argument("gan: invalid dimensions");
  if (cfg_.lambda_gp < 0.0) throw std::invalid_argument("gan: penalty weight must be >= 0");
  if (cfg_.critic_steps < 1) throw std::invalid_argument("gan: critic step ratio must be >= 1");

  std::vector<int> g_dims = {cfg_.latent_dim + cfg_.c_dim};
  std::vector<nn::Act> g_acts;
  for (int h : cfg_.generator_hidden) {
    g_dims.push_back(h);
    g_acts.push_back(nn::Act::relu);
  }
  g_dims.push_back(cfg_.T);
  g_acts.push_back(nn::Act::linear);
  nets_.emplace_back(g_dims, g_acts);

  std::vector<int> d_dims = {cfg_.T + cfg_.c_dim};
  std::vector<nn::Act> d_acts;
  for (int h : cfg_.critic_hidden) {
    d_dims.push_back(h);
    d_acts.push_back(nn::Act::leaky_relu);
  }
  d_dims.push_back(1);
  d_acts.push_back(cfg_.critic_output);
  nets_.emplace_back(d_dims, d_acts);
}

void WganGp::init(std::uint64_t seed) {
  nets_[0].init(seed);
  nets_[1].init(seed + 1);
}

Eigen::MatrixXd WganGp::generate(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& C) const {
  if (Z.cols() != cfg_.latent_dim || C.rows() != Z.rows() || C.cols() != cfg_.c_dim)
    throw std::invalid_argument("gan: latent batch shape mismatch");
  return nets_[0].forward(hcat(Z, C));
}

Eigen::VectorXd WganGp::critic_value(const Eigen::MatrixXd& X, const Eigen::MatrixXd& C) const {
  check_batch(X, C, cfg_.T, cfg_.c_dim);
  return nets_[1].forward(hcat(X, C)).col(0);
}

double WganGp::gradient_penalty(const Eigen::MatrixXd& X, const Eigen::MatrixXd& X_hat,
                                const Eigen::MatrixXd& C, const Eigen::VectorXd& rho) const {
  check_batch(X, C, cfg_.T, cfg_.c_dim);
  check_batch(X_hat, C, cfg_.T, cfg_.c_dim);
  if (rho.size() != X.rows()) throw std::invalid_argument("gan: one mixing weight per row");
  const int B = static_cast<int>(X.rows());

  Eigen::MatrixXd X_tilde =
      rho.asDiagonal() * X_hat + (Eigen::VectorXd::Ones(B) - rho).asDiagonal() * X;
  nn::Cache cache;
  nets_[1].forward(hcat(X_tilde, C), cache);
  Eigen::MatrixXd G = nets_[1].input_gradient(cache);

  double acc = 0.0;
  for (int bi = 0; bi < B; ++bi) {
    const double n = G.row(bi).head(cfg_.T).norm();  // penalty acts on the x part only
    acc += (n - 1.0) * (n - 1.0);
  }
  return acc / B;
}

std::pair<double, double> WganGp::losses(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Z,
                                         const Eigen::MatrixXd& C,
                                         const Eigen::VectorXd& rho) const {
  Eigen::MatrixXd X_hat = generate(Z, C);
  const double d_hat = critic_value(X_hat, C).mean();
  const double d_real = critic_value(X, C).mean();
  const double gp = gradient_penalty(X, X_hat, C, rho);
  return {d_hat - d_real + cfg_.lambda_gp * gp, -d_hat};
}

double WganGp::critic_loss_and_gradients(const Eigen::MatrixXd& X, const Eigen::MatrixXd& X_hat,
                                         const Eigen::MatrixXd& C, const Eigen::VectorXd& rho,
                                         nn::Grads& grads) const {
  check_batch(X, C, cfg_.T, cfg_.c_dim);
  check_batch(X_hat, C, cfg_.T, cfg_.c_dim);
  if (rho.size() != X.rows()) throw std::invalid_argument("gan: one mixing weight per row");
  const int B = static_cast<int>(X.rows());
  const double inv_b = 1.0 / B;

  // + mean d(x_hat)
  nn::Cache cache_hat;
  double loss = nets_[1].forward(hcat(X_hat, C), cache_hat).col(0).mean();
  nets_[1].backward(cache_hat, Eigen::MatrixXd::Constant(B, 1, inv_b), grads);

  // - mean d(x)
  nn::Cache cache_real;
  loss -= nets_[1].forward(hcat(X, C), cache_real).col(0).mean();
  nets_[1].backward(cache_real, Eigen::MatrixXd::Constant(B, 1, -inv_b), grads);

  // + lambda mean (||grad_x d(x_tilde)|| - 1)^2
  Eigen::MatrixXd X_tilde =
      rho.asDiagonal() * X_hat + (Eigen::VectorXd::Ones(B) - rho).asDiagonal() * X;
  nn::Cache cache_mix;
  nets_[1].forward(hcat(X_tilde, C), cache_mix);
  Eigen::MatrixXd G = nets_[1].input_gradient(cache_mix);

  Eigen::MatrixXd gbar = Eigen::MatrixXd::Zero(B, cfg_.T + cfg_.c_dim);
  double gp = 0.0;
  for (int bi = 0; bi < B; ++bi) {
    const double n = G.row(bi).head(cfg_.T).norm();
    gp += (n - 1.0) * (n - 1.0);
    if (n > 0.0)
      gbar.row(bi).head(cfg_.T) =
          G.row(bi).head(cfg_.T) * (cfg_.lambda_gp * 2.0 * (n - 1.0) / (n * B));
  }
  nets_[1].input_gradient_param_backward(cache_mix, gbar, grads);
  return loss + cfg_.lambda_gp * gp / B;
}

double WganGp::generator_loss_and_gradients(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& C,
                                            nn::Grads& grads) const {
  if (Z.cols() != cfg_.latent_dim || C.rows() != Z.rows() || C.cols() != cfg_.c_dim)
    throw std::invalid_argument("gan: latent batch shape mismatch");
  const int B = static_cast<int>(Z.rows());

  nn::Cache cache_g;
  Eigen::MatrixXd X_hat = nets_[0].forward(hcat(Z, C), cache_g);
  nn::Cache cache_d;
  const double loss = -nets_[1].forward(hcat(X_hat, C), cache_d).col(0).mean();

  // pass through the critic without touching its parameters
  nn::Grads scratch = nets_[1].zero_grads();
  Eigen::MatrixXd gin =
      nets_[1].backward(cache_d, Eigen::MatrixXd::Constant(B, 1, -1.0 / B), scratch);
  nets_[0].backward(cache_g, gin.leftCols(cfg_.T), grads);
  return loss;
}

Eigen::MatrixXd WganGp::sample(const Eigen::VectorXd& c, int M, std::uint64_t seed) const {
  if (c.size() != cfg_.c_dim) throw std::invalid_argument("gan: conditioning vector size mismatch");
  if (M <= 0) throw std::invalid_argument("gan: scenario count must be positive");
  nn::Rng rng(seed);
  Eigen::MatrixXd Z = rng.normal_matrix(M, cfg_.latent_dim);
  return generate(Z, c.transpose().replicate(M, 1));
}

FitResult WganGp::fit(const Eigen::MatrixXd& X_ls, const Eigen::MatrixXd& C_ls,
                      const Eigen::MatrixXd& X_vs, const Eigen::MatrixXd& C_vs,
                      const FitOptions& opt) {
  check_batch(X_ls, C_ls, cfg_.T, cfg_.c_dim);
  if (X_vs.rows() > 0) check_batch(X_vs, C_vs, cfg_.T, cfg_.c_dim);
  const int N = static_cast<int>(X_ls.rows());
  const int batch = std::max(1, static_cast<int>(std::lround(opt.batch_fraction * N)));
  const int groups = std::max(1, N / (batch * cfg_.critic_steps));

  nn::Adam opt_g, opt_d;
  opt_g.lr = opt.lr;
  opt_g.beta1 = opt.adam_beta1;
  opt_g.beta2 = opt.adam_beta2;
  opt_g.weight_decay = opt.weight_decay;
  opt_g.attach(nets_[0]);
  opt_d.lr = opt.lr;
  opt_d.beta1 = opt.adam_beta1;
  opt_d.beta2 = opt.adam_beta2;
  opt_d.weight_decay = opt.weight_decay;
  opt_d.attach(nets_[1]);

  nn::Rng rng(opt.seed);
  std::vector<int> idx(N);
  std::iota(idx.begin(), idx.end(), 0);
  rng.shuffle(idx);
  int cursor = 0;
  auto next_batch = [&](Eigen::MatrixXd& Xb, Eigen::MatrixXd& Cb) {
    Xb.resize(batch, cfg_.T);
    Cb.resize(batch, cfg_.c_dim);
    for (int r = 0; r < batch; ++r) {
      if (cursor == N) {
        rng.shuffle(idx);
        cursor = 0;
      }
      Xb.row(r) = X_ls.row(idx[cursor]);
      if (cfg_.c_dim > 0) Cb.row(r) = C_ls.row(idx[cursor]);
      ++cursor;
    }
  };

  auto vs_energy_score = [&](std::uint64_t es_seed) {
    double acc = 0.0;
    for (Eigen::Index d = 0; d < X_vs.rows(); ++d) {
      Eigen::MatrixXd s = sample(C_vs.row(d).transpose(), opt.es_scenarios, es_seed + d);
      acc += metrics::energy_score(s, X_vs.row(d).transpose());
    }
    return acc / X_vs.rows();
  };

  FitResult res;
  double best_es = std::numeric_limits<double>::infinity();
  std::vector<double> best_gen_params;

  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    double c_acc = 0.0, g_acc = 0.0;
    for (int g = 0; g < groups; ++g) {
      for (int s = 0; s < cfg_.critic_steps; ++s) {
        Eigen::MatrixXd Xb, Cb;
        next_batch(Xb, Cb);
        Eigen::MatrixXd Zb = rng.normal_matrix(batch, cfg_.latent_dim);
        Eigen::MatrixXd X_hat = generate(Zb, Cb);
        Eigen::VectorXd rho(batch);
        for (int r = 0; r < batch; ++r) rho[r] = rng.uniform();

        nn::Grads grads = nets_[1].zero_grads();
        const double loss = critic_loss_and_gradients(Xb, X_hat, Cb, rho, grads);
        if (!std::isfinite(loss) || std::abs(loss) > kDivergenceBound)
          throw std::runtime_error("gan fit: critic loss diverged at epoch " +
                                   std::to_string(epoch));
        opt_d.step(nets_[1], grads);
        ++res.critic_updates;
        c_acc += loss;
      }

      Eigen::MatrixXd Xb, Cb;
      next_batch(Xb, Cb);
      Eigen::MatrixXd Zb = rng.normal_matrix(batch, cfg_.latent_dim);
      nn::Grads grads = nets_[0].zero_grads();
      const double loss = generator_loss_and_gradients(Zb, Cb, grads);
      if (!std::isfinite(loss) || std::abs(loss) > kDivergenceBound)
        throw std::runtime_error("gan fit: generator loss diverged at epoch " +
                                 std::to_string(epoch));
      opt_g.step(nets_[0], grads);
      ++res.generator_updates;
      g_acc += loss;
    }
    res.critic_loss.push_back(c_acc / (groups * cfg_.critic_steps));
    res.generator_loss.push_back(g_acc / groups);

    const bool last = epoch + 1 == opt.epochs;
    if (X_vs.rows() > 0 && ((epoch + 1) % opt.checkpoint_every == 0 || last)) {
      const double es = vs_energy_score(opt.seed * 7919ULL + epoch);
      res.checkpoint_epochs.push_back(epoch);
      res.checkpoint_es.push_back(es);
      if (es < best_es) {
        best_es = es;
        res.best_checkpoint = static_cast<int>(res.checkpoint_es.size()) - 1;
        nets_[0].get_params(best_gen_params);
      }
    }
  }
  if (!best_gen_params.empty()) nets_[0].set_params(best_gen_params);
  return res;
}

std::size_t WganGp::n_params() const {
  std::size_t n = 0;
  for (const auto& net : nets_) n += net.n_params();
  return n;
}

void WganGp::get_params(std::vector<double>& out) const {
  out.clear();
  std::vector<double> tmp;
  for (const auto& net : nets_) {
    net.get_params(tmp);
    out.insert(out.end(), tmp.begin(), tmp.end());
  }
}

void WganGp::set_params(const std::vector<double>& in) {
  std::size_t at = 0;
  for (auto& net : nets_) {
    std::vector<double> tmp(in.begin() + at, in.begin() + at + net.n_params());
    net.set_params(tmp);
    at += net.n_params();
  }
}

}  // namespace scengen::gan
