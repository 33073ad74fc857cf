#include "scengen/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace scengen::nn {

double act_eval(Act a, double z) {
  switch (a) {
    case Act::linear:
      return z;
    case Act::relu:
      return z > 0.0 ? z : 0.0;
    case Act::leaky_relu:
      return z > 0.0 ? z : kLeakySlope * z;
    case Act::elu:
      return z > 0.0 ? z : std::expm1(z);
    case Act::elu1p:
      // elu(z)+1: strictly positive, used for monotone integrands
      return z > 0.0 ? z + 1.0 : std::exp(z);
  }
  throw std::logic_error("unknown activation");
}

double act_deriv(Act a, double z) {
  switch (a) {
    case Act::linear:
      return 1.0;
    case Act::relu:
      return z > 0.0 ? 1.0 : 0.0;
    case Act::leaky_relu:
      return z > 0.0 ? 1.0 : kLeakySlope;
    case Act::elu:
    case Act::elu1p:
      return z > 0.0 ? 1.0 : std::exp(z);
  }
  throw std::logic_error("unknown activation");
}

Eigen::MatrixXd act_eval(Act a, const Eigen::MatrixXd& z) {
  return z.unaryExpr([a](double v) { return act_eval(a, v); });
}

Eigen::MatrixXd act_deriv(Act a, const Eigen::MatrixXd& z) {
  return z.unaryExpr([a](double v) { return act_deriv(a, v); });
}

void Grads::set_zero() {
  for (auto& w : W) w.setZero();
  for (auto& v : b) v.setZero();
}

void Grads::add_scaled(const Grads& other, double s) {
  for (std::size_t l = 0; l < W.size(); ++l) {
    W[l] += s * other.W[l];
    b[l] += s * other.b[l];
  }
}

Mlp::Mlp(std::vector<int> dims, std::vector<Act> acts) : act(std::move(acts)), dims_(std::move(dims)) {
  if (dims_.size() < 2 || act.size() != dims_.size() - 1)
    throw std::invalid_argument("Mlp: dims/acts mismatch");
  for (int d : dims_)
    if (d <= 0) throw std::invalid_argument("Mlp: non-positive layer width");
  W.resize(act.size());
  b.resize(act.size());
  mask.resize(act.size());
  for (std::size_t l = 0; l < act.size(); ++l) {
    W[l] = Eigen::MatrixXd::Zero(dims_[l], dims_[l + 1]);
    b[l] = Eigen::VectorXd::Zero(dims_[l + 1]);
  }
}

void Mlp::set_mask(std::size_t layer, Eigen::MatrixXd m) {
  if (layer >= W.size()) throw std::invalid_argument("Mlp::set_mask: bad layer");
  if (m.rows() != W[layer].rows() || m.cols() != W[layer].cols())
    throw std::invalid_argument("Mlp::set_mask: shape mismatch");
  mask[layer] = std::move(m);
  W[layer] = W[layer].cwiseProduct(mask[layer]);
}

void Mlp::init(std::uint64_t seed) {
  Rng rng(seed);
  for (std::size_t l = 0; l < W.size(); ++l) {
    const double s = std::sqrt(2.0 / static_cast<double>(dims_[l]));
    for (Eigen::Index i = 0; i < W[l].rows(); ++i)
      for (Eigen::Index j = 0; j < W[l].cols(); ++j) W[l](i, j) = s * rng.normal();
    if (mask[l].size() > 0) W[l] = W[l].cwiseProduct(mask[l]);
    b[l].setZero();
  }
}

Eigen::MatrixXd Mlp::eff_weight(std::size_t l) const {
  return mask[l].size() > 0 ? W[l].cwiseProduct(mask[l]).eval() : W[l];
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x) const {
  Cache c;
  return forward(x, c);
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x, Cache& c) const {
  if (x.cols() != in_dim()) throw std::invalid_argument("Mlp::forward: input width mismatch");
  c.input = x;
  c.z.assign(n_layers(), {});
  c.a.assign(n_layers(), {});
  c.delta.clear();
  const Eigen::MatrixXd* prev = &c.input;
  for (std::size_t l = 0; l < n_layers(); ++l) {
    c.z[l] = (*prev) * eff_weight(l);
    c.z[l].rowwise() += b[l].transpose();
    c.a[l] = act_eval(act[l], c.z[l]);
    prev = &c.a[l];
  }
  return c.a.back();
}

Eigen::MatrixXd Mlp::backward(const Cache& c, const Eigen::MatrixXd& gy, Grads& g) const {
  Eigen::MatrixXd cur = gy;
  for (std::size_t l = n_layers(); l-- > 0;) {
    Eigen::MatrixXd gz = cur.cwiseProduct(act_deriv(act[l], c.z[l]));
    const Eigen::MatrixXd& a_prev = (l == 0) ? c.input : c.a[l - 1];
    Eigen::MatrixXd dW = a_prev.transpose() * gz;
    if (mask[l].size() > 0) dW = dW.cwiseProduct(mask[l]);
    g.W[l] += dW;
    g.b[l] += gz.colwise().sum().transpose();
    cur = gz * eff_weight(l).transpose();
  }
  return cur;
}

Eigen::MatrixXd Mlp::input_gradient(Cache& c) const {
  if (out_dim() != 1) throw std::logic_error("Mlp::input_gradient: scalar output required");
  const std::size_t L = n_layers();
  c.delta.assign(L, {});
  c.delta[L - 1] = act_deriv(act[L - 1], c.z[L - 1]);
  for (std::size_t l = L - 1; l-- > 0;)
    c.delta[l] = (c.delta[l + 1] * eff_weight(l + 1).transpose()).cwiseProduct(act_deriv(act[l], c.z[l]));
  return c.delta[0] * eff_weight(0).transpose();
}

void Mlp::input_gradient_param_backward(const Cache& c, const Eigen::MatrixXd& gbar,
                                        Grads& g) const {
  if (c.delta.empty()) throw std::logic_error("input_gradient_param_backward: run input_gradient first");
  const std::size_t L = n_layers();
  // reverse of: g = delta_0 * W_0^T, delta_l = (delta_{l+1} W_{l+1}^T) .* D_l
  Eigen::MatrixXd dW0 = gbar.transpose() * c.delta[0];
  if (mask[0].size() > 0) dW0 = dW0.cwiseProduct(mask[0]);
  g.W[0] += dW0;
  Eigen::MatrixXd dbar = gbar * eff_weight(0);
  for (std::size_t l = 0; l + 1 < L; ++l) {
    Eigen::MatrixXd rbar = dbar.cwiseProduct(act_deriv(act[l], c.z[l]));
    Eigen::MatrixXd dW = rbar.transpose() * c.delta[l + 1];
    if (mask[l + 1].size() > 0) dW = dW.cwiseProduct(mask[l + 1]);
    g.W[l + 1] += dW;
    dbar = rbar * eff_weight(l + 1);
  }
}

Grads Mlp::zero_grads() const {
  Grads g;
  g.W.resize(n_layers());
  g.b.resize(n_layers());
  for (std::size_t l = 0; l < n_layers(); ++l) {
    g.W[l] = Eigen::MatrixXd::Zero(W[l].rows(), W[l].cols());
    g.b[l] = Eigen::VectorXd::Zero(b[l].size());
  }
  return g;
}

std::size_t Mlp::n_params() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < n_layers(); ++l) n += W[l].size() + b[l].size();
  return n;
}

void Mlp::get_params(std::vector<double>& out) const {
  out.clear();
  out.reserve(n_params());
  for (std::size_t l = 0; l < n_layers(); ++l) {
    out.insert(out.end(), W[l].data(), W[l].data() + W[l].size());
    out.insert(out.end(), b[l].data(), b[l].data() + b[l].size());
  }
}

void Mlp::set_params(const std::vector<double>& in) {
  if (in.size() != n_params()) throw std::invalid_argument("Mlp::set_params: size mismatch");
  std::size_t off = 0;
  for (std::size_t l = 0; l < n_layers(); ++l) {
    std::copy(in.begin() + off, in.begin() + off + W[l].size(), W[l].data());
    off += W[l].size();
    std::copy(in.begin() + off, in.begin() + off + b[l].size(), b[l].data());
    off += b[l].size();
  }
}

void Adam::attach(const Mlp& net) {
  mW_.clear();
  vW_.clear();
  mb_.clear();
  vb_.clear();
  t_ = 0;
  for (std::size_t l = 0; l < net.n_layers(); ++l) {
    mW_.push_back(Eigen::MatrixXd::Zero(net.W[l].rows(), net.W[l].cols()));
    vW_.push_back(Eigen::MatrixXd::Zero(net.W[l].rows(), net.W[l].cols()));
    mb_.push_back(Eigen::VectorXd::Zero(net.b[l].size()));
    vb_.push_back(Eigen::VectorXd::Zero(net.b[l].size()));
  }
}

void Adam::step(Mlp& net, const Grads& g) {
  if (mW_.size() != net.n_layers()) throw std::logic_error("Adam::step: attach first");
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
  for (std::size_t l = 0; l < net.n_layers(); ++l) {
    Eigen::MatrixXd gW = g.W[l] + weight_decay * net.W[l];
    mW_[l] = beta1 * mW_[l] + (1.0 - beta1) * gW;
    vW_[l] = beta2 * vW_[l] + (1.0 - beta2) * gW.cwiseProduct(gW);
    net.W[l].array() -= (lr / bc1) * mW_[l].array() / ((vW_[l].array() / bc2).sqrt() + eps);
    if (net.mask[l].size() > 0) net.W[l] = net.W[l].cwiseProduct(net.mask[l]);

    Eigen::VectorXd gb = g.b[l] + weight_decay * net.b[l];
    mb_[l] = beta1 * mb_[l] + (1.0 - beta1) * gb;
    vb_[l] = beta2 * vb_[l] + (1.0 - beta2) * gb.cwiseProduct(gb);
    net.b[l].array() -= (lr / bc1) * mb_[l].array() / ((vb_[l].array() / bc2).sqrt() + eps);
  }
}

std::uint64_t Rng::uniform_int(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("Rng::uniform_int: n must be positive");
  // rejection sampling keeps the draw unbiased
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v;
  do {
    v = gen_();
  } while (v >= limit);
  return v % n;
}

Eigen::MatrixXd Rng::normal_matrix(int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = normal();
  return m;
}

}  // namespace scengen::nn
