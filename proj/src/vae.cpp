#include "scengen/vae.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace scengen::vae {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

void check_batch(const Eigen::MatrixXd& X, const Eigen::MatrixXd& C, int T, int c_dim) {
  if (X.cols() != T) throw std::invalid_argument("vae: target batch has wrong width");
  if (C.cols() != c_dim || C.rows() != X.rows())
    throw std::invalid_argument("vae: conditioning batch shape mismatch");
}

Eigen::MatrixXd hcat(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

}  // namespace

Eigen::VectorXd reparameterize(const Eigen::VectorXd& mu, const Eigen::VectorXd& sigma,
                               const Eigen::VectorXd& eps) {
  if (mu.size() != sigma.size() || mu.size() != eps.size())
    throw std::invalid_argument("reparameterize: size mismatch");
  if ((sigma.array() <= 0.0).any())
    throw std::invalid_argument("reparameterize: sigma must be positive");
  return mu.array() + sigma.array() * eps.array();
}

double gaussian_kl(const Eigen::VectorXd& mu, const Eigen::VectorXd& log_var) {
  if (mu.size() != log_var.size()) throw std::invalid_argument("gaussian_kl: size mismatch");
  return 0.5 * (mu.array().square() + log_var.array().exp() - 1.0 - log_var.array()).sum();
}

GaussianVae::GaussianVae(VaeConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.T <= 0 || cfg_.latent_dim <= 0 || cfg_.c_dim < 0)
    throw std::invalid_argument("vae: invalid dimensions");

  std::vector<int> enc_dims = {cfg_.T + cfg_.c_dim};
  std::vector<nn::Act> enc_acts;
  for (int h : cfg_.encoder_hidden) {
    enc_dims.push_back(h);
    enc_acts.push_back(nn::Act::relu);
  }
  enc_dims.push_back(2 * cfg_.latent_dim);
  enc_acts.push_back(nn::Act::linear);
  nets_.emplace_back(enc_dims, enc_acts);

  std::vector<int> dec_dims = {cfg_.latent_dim + cfg_.c_dim};
  std::vector<nn::Act> dec_acts;
  for (int h : cfg_.decoder_hidden) {
    dec_dims.push_back(h);
    dec_acts.push_back(nn::Act::relu);
  }
  dec_dims.push_back(2 * cfg_.T);
  dec_acts.push_back(nn::Act::linear);
  nets_.emplace_back(dec_dims, dec_acts);
}

void GaussianVae::init(std::uint64_t seed) {
  nets_[0].init(seed);
  nets_[1].init(seed + 1);
}

void GaussianVae::encode_decode(const Eigen::MatrixXd& X, const Eigen::MatrixXd& C,
                                const Eigen::MatrixXd& Eps, Eigen::MatrixXd& enc_out,
                                Eigen::MatrixXd& Z, Eigen::MatrixXd& dec_out,
                                std::vector<nn::Cache>* caches) const {
  const int d = cfg_.latent_dim;
  const Eigen::MatrixXd enc_in = hcat(X, C);
  enc_out = caches ? nets_[0].forward(enc_in, (*caches)[0]) : nets_[0].forward(enc_in);
  const auto mu = enc_out.leftCols(d).array();
  const auto sig = (enc_out.rightCols(d).array() * 0.5).exp();
  Z = mu + sig * Eps.array();
  const Eigen::MatrixXd dec_in = hcat(Z, C);
  dec_out = caches ? nets_[1].forward(dec_in, (*caches)[1]) : nets_[1].forward(dec_in);
}

Eigen::VectorXd GaussianVae::elbo(const Eigen::MatrixXd& X, const Eigen::MatrixXd& C,
                                  const Eigen::MatrixXd& Eps) const {
  check_batch(X, C, cfg_.T, cfg_.c_dim);
  if (Eps.rows() != X.rows() || Eps.cols() != cfg_.latent_dim)
    throw std::invalid_argument("vae: noise batch shape mismatch");
  const int B = static_cast<int>(X.rows());
  const int d = cfg_.latent_dim;

  Eigen::MatrixXd enc_out, Z, dec_out;
  encode_decode(X, C, Eps, enc_out, Z, dec_out, nullptr);

  Eigen::VectorXd out(B);
  for (int b = 0; b < B; ++b) {
    const auto mu_phi = enc_out.row(b).head(d).transpose();
    const auto lv_phi = enc_out.row(b).tail(d).transpose();
    const auto mu_th = dec_out.row(b).head(cfg_.T).array();
    const auto lv_th = dec_out.row(b).tail(cfg_.T).array();
    const double recon =
        -0.5 * ((X.row(b).array() - mu_th).square() * (-lv_th).exp() + lv_th + kLog2Pi).sum();
    out[b] = recon - gaussian_kl(mu_phi, lv_phi);
  }
  return out;
}

double GaussianVae::neg_elbo_and_gradients(const Eigen::MatrixXd& X, const Eigen::MatrixXd& C,
                                           const Eigen::MatrixXd& Eps,
                                           std::vector<nn::Grads>& grads) const {
  check_batch(X, C, cfg_.T, cfg_.c_dim);
  if (Eps.rows() != X.rows() || Eps.cols() != cfg_.latent_dim)
    throw std::invalid_argument("vae: noise batch shape mismatch");
  const int B = static_cast<int>(X.rows());
  const int T = cfg_.T;
  const int d = cfg_.latent_dim;
  grads.clear();
  for (const auto& net : nets_) grads.push_back(net.zero_grads());

  std::vector<nn::Cache> cs(2);
  Eigen::MatrixXd enc_out, Z, dec_out;
  encode_decode(X, C, Eps, enc_out, Z, dec_out, &cs);

  const auto mu_phi = enc_out.leftCols(d).array();
  const auto lv_phi = enc_out.rightCols(d).array();
  const auto sig_phi = (lv_phi * 0.5).exp();
  const auto mu_th = dec_out.leftCols(T).array();
  const auto lv_th = dec_out.rightCols(T).array();
  const auto prec_th = (-lv_th).exp();
  const auto resid = X.array() - mu_th;

  double loss = 0.0;
  loss += 0.5 * (resid.square() * prec_th + lv_th + kLog2Pi).sum();
  loss += 0.5 * (mu_phi.square() + lv_phi.exp() - 1.0 - lv_phi).sum();
  loss /= B;

  // decoder head: d(loss)/d(mu_theta, log var_theta)
  Eigen::MatrixXd gy_dec(B, 2 * T);
  gy_dec.leftCols(T) = (-resid * prec_th).matrix() / B;
  gy_dec.rightCols(T) = (0.5 * (1.0 - resid.square() * prec_th)).matrix() / B;
  Eigen::MatrixXd gin_dec = nets_[1].backward(cs[1], gy_dec, grads[1]);
  const auto gz = gin_dec.leftCols(d).array();

  // encoder head: reparameterization chain plus the KL term
  Eigen::MatrixXd gy_enc(B, 2 * d);
  gy_enc.leftCols(d) = (gz + mu_phi / B).matrix();
  gy_enc.rightCols(d) = (gz * 0.5 * sig_phi * Eps.array() + 0.5 * (lv_phi.exp() - 1.0) / B).matrix();
  nets_[0].backward(cs[0], gy_enc, grads[0]);

  return loss;
}

Eigen::MatrixXd GaussianVae::decode_mean(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& C) const {
  if (Z.cols() != cfg_.latent_dim || C.rows() != Z.rows() || C.cols() != cfg_.c_dim)
    throw std::invalid_argument("vae: latent batch shape mismatch");
  return nets_[1].forward(hcat(Z, C)).leftCols(cfg_.T);
}

Eigen::MatrixXd GaussianVae::sample(const Eigen::VectorXd& c, int M, std::uint64_t seed,
                                    bool add_decoder_noise) const {
  if (c.size() != cfg_.c_dim) throw std::invalid_argument("vae: conditioning vector size mismatch");
  if (M <= 0) throw std::invalid_argument("vae: scenario count must be positive");
  nn::Rng rng(seed);
  Eigen::MatrixXd Z = rng.normal_matrix(M, cfg_.latent_dim);
  Eigen::MatrixXd C = c.transpose().replicate(M, 1);
  Eigen::MatrixXd dec_out = nets_[1].forward(hcat(Z, C));
  Eigen::MatrixXd out = dec_out.leftCols(cfg_.T);
  if (add_decoder_noise) {
    Eigen::MatrixXd noise = rng.normal_matrix(M, cfg_.T);
    out.array() += (dec_out.rightCols(cfg_.T).array() * 0.5).exp() * noise.array();
  }
  return out;
}

FitResult GaussianVae::fit(const Eigen::MatrixXd& X_ls, const Eigen::MatrixXd& C_ls,
                           const Eigen::MatrixXd& X_vs, const Eigen::MatrixXd& C_vs,
                           const FitOptions& opt) {
  check_batch(X_ls, C_ls, cfg_.T, cfg_.c_dim);
  if (X_vs.rows() > 0) check_batch(X_vs, C_vs, cfg_.T, cfg_.c_dim);
  const int N = static_cast<int>(X_ls.rows());
  const int batch = std::max(1, static_cast<int>(std::lround(opt.batch_fraction * N)));

  std::vector<nn::Adam> opts(nets_.size());
  for (std::size_t i = 0; i < nets_.size(); ++i) {
    opts[i].lr = opt.lr;
    opts[i].weight_decay = opt.weight_decay;
    opts[i].attach(nets_[i]);
  }

  nn::Rng rng(opt.seed);
  // one fixed noise row per VS datum keeps epochs comparable
  Eigen::MatrixXd eps_vs = rng.normal_matrix(static_cast<int>(X_vs.rows()), cfg_.latent_dim);
  std::vector<int> idx(N);
  std::iota(idx.begin(), idx.end(), 0);

  FitResult res;
  double best_vs = -std::numeric_limits<double>::infinity();
  std::vector<double> best_params;

  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    rng.shuffle(idx);
    double train_acc = 0.0;
    int n_batches = 0;
    for (int at = 0; at < N; at += batch) {
      const int len = std::min(batch, N - at);
      Eigen::MatrixXd Xb(len, cfg_.T), Cb(len, cfg_.c_dim);
      for (int r = 0; r < len; ++r) {
        Xb.row(r) = X_ls.row(idx[at + r]);
        if (cfg_.c_dim > 0) Cb.row(r) = C_ls.row(idx[at + r]);
      }
      Eigen::MatrixXd eps = rng.normal_matrix(len, cfg_.latent_dim);
      std::vector<nn::Grads> grads;
      const double loss = neg_elbo_and_gradients(Xb, Cb, eps, grads);
      if (!std::isfinite(loss))
        throw std::runtime_error(
            "vae fit: non-finite training loss at epoch " + std::to_string(epoch) +
            "; consider lowering the learning rate");
      for (std::size_t i = 0; i < nets_.size(); ++i) opts[i].step(nets_[i], grads[i]);
      train_acc -= loss;
      ++n_batches;
    }
    res.train_elbo.push_back(train_acc / std::max(1, n_batches));

    if (X_vs.rows() > 0) {
      const double vs = elbo(X_vs, C_vs, eps_vs).mean();
      res.vs_elbo.push_back(vs);
      if (vs > best_vs) {
        best_vs = vs;
        res.best_epoch = epoch;
        get_params(best_params);
      }
    } else {
      res.best_epoch = epoch;
    }
  }
  if (!best_params.empty()) set_params(best_params);
  return res;
}

std::size_t GaussianVae::n_params() const {
  std::size_t n = 0;
  for (const auto& net : nets_) n += net.n_params();
  return n;
}

void GaussianVae::get_params(std::vector<double>& out) const {
  out.clear();
  std::vector<double> tmp;
  for (const auto& net : nets_) {
    net.get_params(tmp);
    out.insert(out.end(), tmp.begin(), tmp.end());
  }
}

void GaussianVae::set_params(const std::vector<double>& in) {
  std::size_t at = 0;
  for (auto& net : nets_) {
    std::vector<double> tmp(in.begin() + at, in.begin() + at + net.n_params());
    net.set_params(tmp);
    at += net.n_params();
  }
}

}  // namespace scengen::vae
