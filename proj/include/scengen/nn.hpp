#pragma once
// Small dense/masked multilayer perceptron with hand-rolled backprop.
// Shared by every generative model in this project.
//
// Conventions: a batch is (B x dim) with samples as rows; layer weights are
// (in x out), so forward is z = a*W + b^T broadcast over rows.

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>

namespace scengen::nn {

enum class Act { linear, relu, leaky_relu, elu, elu1p };

// leaky_relu negative-side slope
inline constexpr double kLeakySlope = 0.2;

double act_eval(Act a, double z);
double act_deriv(Act a, double z);
Eigen::MatrixXd act_eval(Act a, const Eigen::MatrixXd& z);
Eigen::MatrixXd act_deriv(Act a, const Eigen::MatrixXd& z);

// Parameter-shaped gradient accumulator.
struct Grads {
  std::vector<Eigen::MatrixXd> W;
  std::vector<Eigen::VectorXd> b;
  void set_zero();
  void add_scaled(const Grads& other, double s);
};

// Forward-pass state kept for backward passes.
struct Cache {
  Eigen::MatrixXd input;               // (B x in)
  std::vector<Eigen::MatrixXd> z;      // pre-activations per layer
  std::vector<Eigen::MatrixXd> a;      // activations per layer
  std::vector<Eigen::MatrixXd> delta;  // d(out)/d(z_l), filled by input_gradient
};

class Mlp {
 public:
  Mlp() = default;
  // dims = {in, h1, ..., out}; acts has one entry per layer (dims.size()-1).
  Mlp(std::vector<int> dims, std::vector<Act> acts);

  // Optional connectivity mask for one layer, same shape as its weight matrix.
  // Zero entries sever the connection; weights under them stay zero.
  void set_mask(std::size_t layer, Eigen::MatrixXd m);

  void init(std::uint64_t seed);  // He-style normal init, zero biases

  int in_dim() const { return dims_.front(); }
  int out_dim() const { return dims_.back(); }
  std::size_t n_layers() const { return act.size(); }

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Cache& c) const;

  // Given dL/d(output), accumulate parameter grads and return dL/d(input).
  Eigen::MatrixXd backward(const Cache& c, const Eigen::MatrixXd& gy, Grads& g) const;

  // Per-row gradient of a scalar-output net w.r.t. its input (B x in).
  // Stores the intermediate deltas in the cache for the second-order pass.
  Eigen::MatrixXd input_gradient(Cache& c) const;

  // Second-order pass for penalties on the input gradient: given
  // dP/d(input_gradient) rows, accumulate dP/dW. Activation masks are treated
  // as locally constant (exact a.e. for the piecewise-linear activations).
  // Biases receive no gradient from this term. Requires input_gradient first.
  void input_gradient_param_backward(const Cache& c, const Eigen::MatrixXd& gbar,
                                     Grads& g) const;

  Grads zero_grads() const;

  std::size_t n_params() const;
  void get_params(std::vector<double>& out) const;
  void set_params(const std::vector<double>& in);

  std::vector<Eigen::MatrixXd> W;
  std::vector<Eigen::VectorXd> b;
  std::vector<Eigen::MatrixXd> mask;  // empty matrix => dense layer
  std::vector<Act> act;

  Eigen::MatrixXd eff_weight(std::size_t l) const;

 private:
  std::vector<int> dims_;
};

// Adam with additive L2 weight decay (decay folded into the gradient).
class Adam {
 public:
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;

  void attach(const Mlp& net);
  void step(Mlp& net, const Grads& g);

 private:
  std::vector<Eigen::MatrixXd> mW_, vW_;
  std::vector<Eigen::VectorXd> mb_, vb_;
  long t_ = 0;
};

// Seeded RNG wrapper so every random draw in the project flows through one type.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double normal() { return normal_(gen_); }
  double uniform() { return unif_(gen_); }
  // uniform integer in [0, n)
  std::uint64_t uniform_int(std::uint64_t n);
  std::mt19937_64& raw() { return gen_; }

  Eigen::MatrixXd normal_matrix(int rows, int cols);

  // Fisher-Yates shuffle, self-contained so results depend only on the seed.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = uniform_int(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
};

}  // namespace scengen::nn
