#pragma once
// Conditional Gaussian-MLP variational autoencoder.
//
// Encoder maps [x | c] to (mu_phi, log var_phi); decoder maps [z | c] to
// (mu_theta, log var_theta). Training maximizes the single-sample ELBO with
// a closed-form KL term; sampling decodes standard-normal latents and keeps
// the decoder mean unless decoder noise is requested.

#include "scengen/nn.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace scengen::vae {

struct VaeConfig {
  int T = 24;      // target dimension
  int c_dim = 0;   // conditioning dimension
  int latent_dim = 5;
  std::vector<int> encoder_hidden = {500};
  std::vector<int> decoder_hidden = {500};
};

struct FitOptions {
  int epochs = 300;
  double lr = 1e-3;
  double weight_decay = 1e-4;
  double batch_fraction = 0.1;  // of the learning set
  std::uint64_t seed = 1;
  bool verbose = false;
};

struct FitResult {
  std::vector<double> train_elbo;  // per epoch, higher is better
  std::vector<double> vs_elbo;
  int best_epoch = -1;  // epoch whose parameters were kept
};

// z = mu + sigma .* eps
Eigen::VectorXd reparameterize(const Eigen::VectorXd& mu, const Eigen::VectorXd& sigma,
                               const Eigen::VectorXd& eps);

// KL( N(mu, diag(exp(log_var))) || N(0, I) ), always >= 0
double gaussian_kl(const Eigen::VectorXd& mu, const Eigen::VectorXd& log_var);

class GaussianVae {
 public:
  explicit GaussianVae(VaeConfig cfg);

  void init(std::uint64_t seed);

  const VaeConfig& config() const { return cfg_; }

  // per-row single-sample ELBO; Eps holds one latent noise row per batch row
  Eigen::VectorXd elbo(const Eigen::MatrixXd& X, const Eigen::MatrixXd& C,
                       const Eigen::MatrixXd& Eps) const;

  // mean negative ELBO and its parameter gradients (grads[0] encoder, [1] decoder)
  double neg_elbo_and_gradients(const Eigen::MatrixXd& X, const Eigen::MatrixXd& C,
                                const Eigen::MatrixXd& Eps, std::vector<nn::Grads>& grads) const;

  // decoder mean for given latents, one row per latent
  Eigen::MatrixXd decode_mean(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& C) const;

  // M scenarios for one conditioning vector; decoder mean unless add_decoder_noise
  Eigen::MatrixXd sample(const Eigen::VectorXd& c, int M, std::uint64_t seed,
                         bool add_decoder_noise = false) const;

  FitResult fit(const Eigen::MatrixXd& X_ls, const Eigen::MatrixXd& C_ls,
                const Eigen::MatrixXd& X_vs, const Eigen::MatrixXd& C_vs,
                const FitOptions& opt);

  std::size_t n_params() const;
  void get_params(std::vector<double>& out) const;
  void set_params(const std::vector<double>& in);

  std::vector<nn::Mlp>& nets() { return nets_; }
  const std::vector<nn::Mlp>& nets() const { return nets_; }

 private:
  VaeConfig cfg_;
  std::vector<nn::Mlp> nets_;  // [0] encoder -> 2d, [1] decoder -> 2T

  // forward through both nets; outputs are views into per-row quantities
  void encode_decode(const Eigen::MatrixXd& X, const Eigen::MatrixXd& C,
                     const Eigen::MatrixXd& Eps, Eigen::MatrixXd& enc_out,
                     Eigen::MatrixXd& Z, Eigen::MatrixXd& dec_out,
                     std::vector<nn::Cache>* caches) const;
};

}  // namespace scengen::vae
