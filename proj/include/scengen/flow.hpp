#pragma once
// Conditional autoregressive normalizing flow with exact densities.
//
// The default variant maps each target dimension through a strictly
// increasing function built by integrating a positive neural integrand
// (Clenshaw-Curtis quadrature), conditioned on an autoregressive embedding of
// the preceding dimensions and the weather vector. The affine variant stacks
// K scale-and-shift autoregressive steps instead.

#include "scengen/nn.hpp"
#include "scengen/quadrature.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace scengen::flow {

struct FlowConfig {
  int T = 24;     // target dimension
  int c_dim = 0;  // conditioning dimension
  int embedding_size = 40;
  std::vector<int> conditioner_hidden = {300, 300, 300, 300};
  std::vector<int> integrand_hidden = {40, 40, 40};
  std::vector<int> offset_hidden = {40};
  int quad_order = 32;
  bool affine = false;  // affine variant instead of the monotone-integrand one
  int affine_steps = 5;
};

struct FitOptions {
  int epochs = 300;
  double lr = 1e-4;
  double weight_decay = 5e-4;
  double batch_fraction = 0.1;  // of the learning set
  std::uint64_t seed = 1;
  bool verbose = false;
};

struct FitResult {
  std::vector<double> train_nll;  // per epoch
  std::vector<double> vs_nll;
  int best_epoch = -1;  // epoch whose parameters were kept
};

// One scale-and-shift transform: z = exp(alpha)*x + beta, log-derivative alpha.
double affine_step(double x, double alpha, double beta);

// Masks for an autoregressive conditioner over [x (T dims) | c (c_dim dims)]
// producing out_per_dim values per target dimension; c is visible everywhere,
// x_i only to outputs for dimensions beyond i.
std::vector<Eigen::MatrixXd> autoregressive_masks(int T, int c_dim,
                                                  const std::vector<int>& hidden,
                                                  int out_per_dim);

class ConditionalFlow {
 public:
  explicit ConditionalFlow(FlowConfig cfg);

  void init(std::uint64_t seed);

  const FlowConfig& config() const { return cfg_; }

  // z and per-row log|det J| for a batch; rows of X are target vectors.
  void forward_transform(const Eigen::MatrixXd& X, const Eigen::MatrixXd& C,
                         Eigen::MatrixXd& Z, Eigen::VectorXd& log_det) const;

  // per-row log p(x | c)
  Eigen::VectorXd log_density(const Eigen::MatrixXd& X, const Eigen::MatrixXd& C) const;

  // mean negative log-likelihood and parameter gradients for a batch
  double nll_and_gradients(const Eigen::MatrixXd& X, const Eigen::MatrixXd& C,
                           std::vector<nn::Grads>& grads) const;

  // x solving forward_transform(x) = z, row-wise; bisection for the monotone
  // variant (tolerance 1e-6 in z-space), closed form for the affine one.
  Eigen::MatrixXd inverse_transform(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& C) const;

  // M scenarios for one conditioning vector; optionally returns their log-densities
  Eigen::MatrixXd sample(const Eigen::VectorXd& c, int M, std::uint64_t seed,
                         Eigen::VectorXd* log_densities = nullptr) const;

  FitResult fit(const Eigen::MatrixXd& X_ls, const Eigen::MatrixXd& C_ls,
                const Eigen::MatrixXd& X_vs, const Eigen::MatrixXd& C_vs,
                const FitOptions& opt);

  // flat parameter access across all sub-networks (checkpointing, tests)
  std::size_t n_params() const;
  void get_params(std::vector<double>& out) const;
  void set_params(const std::vector<double>& in);

  std::vector<nn::Mlp>& nets() { return nets_; }
  const std::vector<nn::Mlp>& nets() const { return nets_; }

 private:
  // monotone variant: nets_[0]=conditioner, nets_[1]=integrand, nets_[2]=offset
  // affine variant:   nets_[s]=conditioner of step s
  FlowConfig cfg_;
  quad::Rule rule_;
  std::vector<nn::Mlp> nets_;

  void mono_forward(const Eigen::MatrixXd& X, const Eigen::MatrixXd& C, Eigen::MatrixXd& Z,
                    Eigen::VectorXd& log_det, std::vector<nn::Cache>* caches) const;
  void affine_forward(const Eigen::MatrixXd& X, const Eigen::MatrixXd& C, Eigen::MatrixXd& Z,
                      Eigen::VectorXd& log_det, std::vector<nn::Cache>* caches,
                      std::vector<Eigen::MatrixXd>* alphas) const;
  Eigen::MatrixXd mono_inverse(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& C) const;
  Eigen::MatrixXd affine_inverse(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& C) const;

  std::vector<int> step_perm(int step) const;  // variable order for affine steps
};

}  // namespace scengen::flow
