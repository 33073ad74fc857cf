#include "scengen/flow.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace scengen::flow {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kZTol = 1e-6;      // bisection tolerance in z-space
constexpr double kBracket0 = 10.0;  // initial inversion bracket half-width

double safe_log(double v) { return std::log(std::max(v, 1e-300)); }

void check_batch(const Eigen::MatrixXd& X, const Eigen::MatrixXd& C, int T, int c_dim) {
  if (X.cols() != T) throw std::invalid_argument("flow: target width mismatch");
  if (C.cols() != c_dim) throw std::invalid_argument("flow: conditioning width mismatch");
  if (X.rows() != C.rows()) throw std::invalid_argument("flow: batch row mismatch");
}

}  // namespace

double affine_step(double x, double alpha, double beta) { return std::exp(alpha) * x + beta; }

std::vector<Eigen::MatrixXd> autoregressive_masks(int T, int c_dim,
                                                  const std::vector<int>& hidden,
                                                  int out_per_dim) {
  if (T < 1 || c_dim < 0 || hidden.empty()) throw std::invalid_argument("autoregressive_masks");
  // degrees: x_i -> i (1-based), c -> 0, hidden unit k -> k mod T.
  // a unit of degree m sees exactly x_1..x_m and all of c.
  std::vector<int> in_deg(T + c_dim, 0);
  for (int i = 0; i < T; ++i) in_deg[i] = i + 1;

  std::vector<Eigen::MatrixXd> masks;
  std::vector<int> prev = in_deg;
  for (int width : hidden) {
    Eigen::MatrixXd m(prev.size(), width);
    for (int k = 0; k < width; ++k) {
      const int deg = k % T;
      for (std::size_t p = 0; p < prev.size(); ++p) m(p, k) = (prev[p] <= deg) ? 1.0 : 0.0;
    }
    masks.push_back(m);
    prev.assign(width, 0);
    for (int k = 0; k < width; ++k) prev[k] = k % T;
  }
  // output block for 0-based dim i may depend on x_1..x_i only: degree <= i
  Eigen::MatrixXd mo(prev.size(), static_cast<Eigen::Index>(T) * out_per_dim);
  for (int i = 0; i < T; ++i)
    for (int j = 0; j < out_per_dim; ++j)
      for (std::size_t p = 0; p < prev.size(); ++p)
        mo(p, i * out_per_dim + j) = (prev[p] <= i) ? 1.0 : 0.0;
  masks.push_back(mo);
  return masks;
}

ConditionalFlow::ConditionalFlow(FlowConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.T < 1) throw std::invalid_argument("FlowConfig: T must be positive");
  if (cfg_.quad_order < 2) throw std::invalid_argument("FlowConfig: quad_order must be >= 2");
  rule_ = quad::clenshaw_curtis(cfg_.quad_order);

  const int in = cfg_.T + cfg_.c_dim;
  if (cfg_.affine) {
    if (cfg_.affine_steps < 1) throw std::invalid_argument("FlowConfig: affine_steps");
    for (int s = 0; s < cfg_.affine_steps; ++s) {
      std::vector<int> dims = {in};
      dims.insert(dims.end(), cfg_.conditioner_hidden.begin(), cfg_.conditioner_hidden.end());
      dims.push_back(cfg_.T * 2);
      std::vector<nn::Act> acts(dims.size() - 1, nn::Act::elu);
      acts.back() = nn::Act::linear;
      nn::Mlp net(dims, acts);
      auto masks = autoregressive_masks(cfg_.T, cfg_.c_dim, cfg_.conditioner_hidden, 2);
      for (std::size_t l = 0; l < masks.size(); ++l) net.set_mask(l, masks[l]);
      nets_.push_back(std::move(net));
    }
  } else {
    const int H = cfg_.embedding_size;
    std::vector<int> cdims = {in};
    cdims.insert(cdims.end(), cfg_.conditioner_hidden.begin(), cfg_.conditioner_hidden.end());
    cdims.push_back(cfg_.T * H);
    std::vector<nn::Act> cacts(cdims.size() - 1, nn::Act::elu);
    cacts.back() = nn::Act::linear;
    nn::Mlp cond(cdims, cacts);
    auto masks = autoregressive_masks(cfg_.T, cfg_.c_dim, cfg_.conditioner_hidden, H);
    for (std::size_t l = 0; l < masks.size(); ++l) cond.set_mask(l, masks[l]);
    nets_.push_back(std::move(cond));

    std::vector<int> tdims = {1 + H};
    tdims.insert(tdims.end(), cfg_.integrand_hidden.begin(), cfg_.integrand_hidden.end());
    tdims.push_back(1);
    std::vector<nn::Act> tacts(tdims.size() - 1, nn::Act::elu);
    tacts.back() = nn::Act::elu1p;  // strictly positive integrand
    nets_.emplace_back(tdims, tacts);

    std::vector<int> odims = {H};
    odims.insert(odims.end(), cfg_.offset_hidden.begin(), cfg_.offset_hidden.end());
    odims.push_back(1);
    std::vector<nn::Act> oacts(odims.size() - 1, nn::Act::elu);
    oacts.back() = nn::Act::linear;
    nets_.emplace_back(odims, oacts);
  }
}

void ConditionalFlow::init(std::uint64_t seed) {
  for (std::size_t i = 0; i < nets_.size(); ++i) nets_[i].init(seed + 1000 * i + 1);
}

std::vector<int> ConditionalFlow::step_perm(int step) const {
  std::vector<int> p(cfg_.T);
  std::iota(p.begin(), p.end(), 0);
  if (step % 2 == 1) std::reverse(p.begin(), p.end());
  return p;
}

void ConditionalFlow::mono_forward(const Eigen::MatrixXd& X, const Eigen::MatrixXd& C,
                                   Eigen::MatrixXd& Z, Eigen::VectorXd& log_det,
                                   std::vector<nn::Cache>* caches) const {
  const int B = static_cast<int>(X.rows());
  const int T = cfg_.T, H = cfg_.embedding_size, Q = cfg_.quad_order;

  std::vector<nn::Cache> local;
  std::vector<nn::Cache>& cs = caches ? *caches : local;
  cs.assign(3, nn::Cache{});

  Eigen::MatrixXd U(B, T + cfg_.c_dim);
  U.leftCols(T) = X;
  if (cfg_.c_dim > 0) U.rightCols(cfg_.c_dim) = C;
  const Eigen::MatrixXd& Hout = nets_[0].forward(U, cs[0]);  // (B x T*H)

  // integrand inputs: quadrature rows then one boundary row per (b, i)
  const long nq = static_cast<long>(B) * T * Q;
  Eigen::MatrixXd tin(nq + static_cast<long>(B) * T, 1 + H);
  for (int b = 0; b < B; ++b)
    for (int i = 0; i < T; ++i) {
      const auto h = Hout.block(b, i * H, 1, H);
      const double x = X(b, i);
      for (int k = 0; k < Q; ++k) {
        const long r = (static_cast<long>(b) * T + i) * Q + k;
        tin(r, 0) = x * (rule_.nodes[k] + 1.0) * 0.5;
        tin.block(r, 1, 1, H) = h;
      }
      const long rb = nq + static_cast<long>(b) * T + i;
      tin(rb, 0) = x;
      tin.block(rb, 1, 1, H) = h;
    }
  const Eigen::MatrixXd& tau = nets_[1].forward(tin, cs[1]);  // (rows x 1)

  // offsets
  Eigen::MatrixXd oin(static_cast<long>(B) * T, H);
  for (int b = 0; b < B; ++b)
    for (int i = 0; i < T; ++i) oin.row(static_cast<long>(b) * T + i) = Hout.block(b, i * H, 1, H);
  const Eigen::MatrixXd& beta = nets_[2].forward(oin, cs[2]);  // (B*T x 1)

  Z.resize(B, T);
  log_det.resize(B);
  log_det.setZero();
  for (int b = 0; b < B; ++b)
    for (int i = 0; i < T; ++i) {
      double acc = 0.0;
      for (int k = 0; k < Q; ++k)
        acc += rule_.weights[k] * tau((static_cast<long>(b) * T + i) * Q + k, 0);
      const long rb = nq + static_cast<long>(b) * T + i;
      Z(b, i) = 0.5 * X(b, i) * acc + beta(static_cast<long>(b) * T + i, 0);
      log_det[b] += safe_log(tau(rb, 0));
    }
}

void ConditionalFlow::affine_forward(const Eigen::MatrixXd& X, const Eigen::MatrixXd& C,
                                     Eigen::MatrixXd& Z, Eigen::VectorXd& log_det,
                                     std::vector<nn::Cache>* caches,
                                     std::vector<Eigen::MatrixXd>* alphas) const {
  const int B = static_cast<int>(X.rows());
  const int T = cfg_.T;
  std::vector<nn::Cache> local;
  std::vector<nn::Cache>& cs = caches ? *caches : local;
  cs.assign(nets_.size(), nn::Cache{});
  if (alphas) alphas->assign(nets_.size(), Eigen::MatrixXd());

  Eigen::MatrixXd cur = X;
  log_det.setZero(B);
  for (std::size_t s = 0; s < nets_.size(); ++s) {
    const auto perm = step_perm(static_cast<int>(s));
    Eigen::MatrixXd xp(B, T);
    for (int j = 0; j < T; ++j) xp.col(j) = cur.col(perm[j]);
    Eigen::MatrixXd U(B, T + cfg_.c_dim);
    U.leftCols(T) = xp;
    if (cfg_.c_dim > 0) U.rightCols(cfg_.c_dim) = C;
    const Eigen::MatrixXd& out = nets_[s].forward(U, cs[s]);  // (B x 2T)
    Eigen::MatrixXd zp(B, T), alpha(B, T);
    for (int j = 0; j < T; ++j) {
      alpha.col(j) = out.col(2 * j);
      zp.col(j) = out.col(2 * j).array().exp() * xp.col(j).array() + out.col(2 * j + 1).array();
    }
    log_det += alpha.rowwise().sum();
    if (alphas) (*alphas)[s] = alpha;
    for (int j = 0; j < T; ++j) cur.col(perm[j]) = zp.col(j);
  }
  Z = cur;
}

void ConditionalFlow::forward_transform(const Eigen::MatrixXd& X, const Eigen::MatrixXd& C,
                                        Eigen::MatrixXd& Z, Eigen::VectorXd& log_det) const {
  check_batch(X, C, cfg_.T, cfg_.c_dim);
  if (cfg_.affine)
    affine_forward(X, C, Z, log_det, nullptr, nullptr);
  else
    mono_forward(X, C, Z, log_det, nullptr);
}

Eigen::VectorXd ConditionalFlow::log_density(const Eigen::MatrixXd& X,
                                             const Eigen::MatrixXd& C) const {
  Eigen::MatrixXd Z;
  Eigen::VectorXd log_det;
  forward_transform(X, C, Z, log_det);
  Eigen::VectorXd lp(X.rows());
  for (Eigen::Index b = 0; b < X.rows(); ++b)
    lp[b] = -0.5 * Z.row(b).squaredNorm() - 0.5 * cfg_.T * kLog2Pi + log_det[b];
  return lp;
}

double ConditionalFlow::nll_and_gradients(const Eigen::MatrixXd& X, const Eigen::MatrixXd& C,
                                          std::vector<nn::Grads>& grads) const {
  check_batch(X, C, cfg_.T, cfg_.c_dim);
  const int B = static_cast<int>(X.rows());
  const int T = cfg_.T;
  grads.clear();
  for (const auto& net : nets_) grads.push_back(net.zero_grads());

  if (cfg_.affine) {
    std::vector<nn::Cache> cs;
    std::vector<Eigen::MatrixXd> alphas;
    Eigen::MatrixXd Z;
    Eigen::VectorXd log_det;
    affine_forward(X, C, Z, log_det, &cs, &alphas);

    double nll = 0.0;
    for (int b = 0; b < B; ++b)
      nll += 0.5 * Z.row(b).squaredNorm() + 0.5 * T * kLog2Pi - log_det[b];
    nll /= B;

    Eigen::MatrixXd G = Z / static_cast<double>(B);  // dL/d(step output), original order
    for (int s = static_cast<int>(nets_.size()) - 1; s >= 0; --s) {
      const auto perm = step_perm(s);
      Eigen::MatrixXd Gp(B, T);
      for (int j = 0; j < T; ++j) Gp.col(j) = G.col(perm[j]);
      const Eigen::MatrixXd& xp = cs[s].input.leftCols(T);
      const Eigen::MatrixXd& alpha = alphas[s];
      Eigen::MatrixXd gy(B, 2 * T);
      for (int j = 0; j < T; ++j) {
        // z_j = exp(a_j) x_j + b_j ; log_det contributes -1/B per alpha entry
        gy.col(2 * j) = (Gp.col(j).array() * alpha.col(j).array().exp() * xp.col(j).array()) -
                        1.0 / static_cast<double>(B);
        gy.col(2 * j + 1) = Gp.col(j);
      }
      Eigen::MatrixXd gin = nets_[s].backward(cs[s], gy, grads[s]);
      Eigen::MatrixXd gxp = gin.leftCols(T);
      for (int j = 0; j < T; ++j)
        gxp.col(j) += Gp.col(j).array().cwiseProduct(alpha.col(j).array().exp()).matrix();
      Eigen::MatrixXd Gnew(B, T);
      for (int j = 0; j < T; ++j) Gnew.col(perm[j]) = gxp.col(j);
      G = Gnew;
    }
    return nll;
  }

  const int H = cfg_.embedding_size, Q = cfg_.quad_order;
  std::vector<nn::Cache> cs;
  Eigen::MatrixXd Z;
  Eigen::VectorXd log_det;
  mono_forward(X, C, Z, log_det, &cs);
  const Eigen::MatrixXd& tau = cs[1].a.back();
  const long nq = static_cast<long>(B) * T * Q;

  double nll = 0.0;
  for (int b = 0; b < B; ++b)
    nll += 0.5 * Z.row(b).squaredNorm() + 0.5 * T * kLog2Pi - log_det[b];
  nll /= B;

  // seed gradients
  Eigen::MatrixXd dZ = Z / static_cast<double>(B);
  Eigen::MatrixXd gtau(nq + static_cast<long>(B) * T, 1);
  for (int b = 0; b < B; ++b)
    for (int i = 0; i < T; ++i) {
      for (int k = 0; k < Q; ++k) {
        const long r = (static_cast<long>(b) * T + i) * Q + k;
        gtau(r, 0) = dZ(b, i) * 0.5 * X(b, i) * rule_.weights[k];
      }
      const long rb = nq + static_cast<long>(b) * T + i;
      gtau(rb, 0) = -1.0 / (static_cast<double>(B) * std::max(tau(rb, 0), 1e-300));
    }
  Eigen::MatrixXd gtin = nets_[1].backward(cs[1], gtau, grads[1]);

  Eigen::MatrixXd gbeta(static_cast<long>(B) * T, 1);
  for (int b = 0; b < B; ++b)
    for (int i = 0; i < T; ++i) gbeta(static_cast<long>(b) * T + i, 0) = dZ(b, i);
  Eigen::MatrixXd goin = nets_[2].backward(cs[2], gbeta, grads[2]);

  // gather embedding gradients from integrand rows and offset rows
  Eigen::MatrixXd gH = Eigen::MatrixXd::Zero(B, static_cast<long>(T) * H);
  for (int b = 0; b < B; ++b)
    for (int i = 0; i < T; ++i) {
      Eigen::RowVectorXd acc = goin.row(static_cast<long>(b) * T + i);
      for (int k = 0; k < Q; ++k)
        acc += gtin.block((static_cast<long>(b) * T + i) * Q + k, 1, 1, H);
      acc += gtin.block(nq + static_cast<long>(b) * T + i, 1, 1, H);
      gH.block(b, i * H, 1, H) = acc;
    }
  nets_[0].backward(cs[0], gH, grads[0]);
  return nll;
}

Eigen::MatrixXd ConditionalFlow::mono_inverse(const Eigen::MatrixXd& Z,
                                              const Eigen::MatrixXd& C) const {
  const int B = static_cast<int>(Z.rows());
  const int T = cfg_.T, H = cfg_.embedding_size, Q = cfg_.quad_order;
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(B, T);

  for (int i = 0; i < T; ++i) {
    // embeddings for dimension i depend only on x_<i, valid with zero padding
    Eigen::MatrixXd U(B, T + cfg_.c_dim);
    U.leftCols(T) = X;
    if (cfg_.c_dim > 0) U.rightCols(cfg_.c_dim) = C;
    Eigen::MatrixXd Hout = nets_[0].forward(U);
    Eigen::MatrixXd h = Hout.middleCols(i * H, H);  // (B x H)
    Eigen::VectorXd beta = nets_[2].forward(h).col(0);

    auto f_eval = [&](const Eigen::VectorXd& xs) {
      Eigen::MatrixXd tin(static_cast<long>(B) * Q, 1 + H);
      for (int b = 0; b < B; ++b)
        for (int k = 0; k < Q; ++k) {
          const long r = static_cast<long>(b) * Q + k;
          tin(r, 0) = xs[b] * (rule_.nodes[k] + 1.0) * 0.5;
          tin.block(r, 1, 1, H) = h.row(b);
        }
      Eigen::MatrixXd tau = nets_[1].forward(tin);
      Eigen::VectorXd out(B);
      for (int b = 0; b < B; ++b) {
        double acc = 0.0;
        for (int k = 0; k < Q; ++k) acc += rule_.weights[k] * tau(static_cast<long>(b) * Q + k, 0);
        out[b] = 0.5 * xs[b] * acc + beta[b];
      }
      return out;
    };

    Eigen::VectorXd lo = Eigen::VectorXd::Constant(B, -kBracket0);
    Eigen::VectorXd hi = Eigen::VectorXd::Constant(B, kBracket0);
    Eigen::VectorXd target = Z.col(i);
    // geometric expansion until the bracket straddles each root; the learned
    // integrand can decay to zero far out, making the transform saturate, so
    // a draw beyond the attainable range is pinned just inside it rather than
    // expanding forever
    Eigen::VectorXd flo = f_eval(lo), fhi = f_eval(hi);
    for (int attempt = 0;; ++attempt) {
      bool ok = true;
      for (int b = 0; b < B; ++b)
        if (flo[b] > target[b] || fhi[b] < target[b]) ok = false;
      if (ok) break;
      if (attempt > 60)
        throw std::runtime_error("inverse_transform: bracket expansion failed at dimension " +
                                 std::to_string(i));
      for (int b = 0; b < B; ++b) {
        if (flo[b] > target[b]) lo[b] *= 2.0;
        if (fhi[b] < target[b]) hi[b] *= 2.0;
      }
      Eigen::VectorXd flo_next = f_eval(lo), fhi_next = f_eval(hi);
      for (int b = 0; b < B; ++b) {
        if (fhi[b] < target[b] && fhi_next[b] - fhi[b] < kZTol)
          target[b] = std::max(flo_next[b], fhi_next[b] - kZTol);
        if (flo[b] > target[b] && flo[b] - flo_next[b] < kZTol)
          target[b] = std::min(fhi_next[b], flo_next[b] + kZTol);
      }
      flo = flo_next;
      fhi = fhi_next;
    }

    Eigen::VectorXd mid(B);
    for (int iter = 0; iter < 200; ++iter) {
      mid = 0.5 * (lo + hi);
      Eigen::VectorXd fm = f_eval(mid);
      bool all_done = true;
      for (int b = 0; b < B; ++b) {
        const double gap = fm[b] - target[b];
        if (std::abs(gap) >= kZTol) all_done = false;
        if (gap < 0.0)
          lo[b] = mid[b];
        else
          hi[b] = mid[b];
      }
      if (all_done) break;
    }
    X.col(i) = 0.5 * (lo + hi);
  }
  return X;
}

Eigen::MatrixXd ConditionalFlow::affine_inverse(const Eigen::MatrixXd& Z,
                                                const Eigen::MatrixXd& C) const {
  const int B = static_cast<int>(Z.rows());
  const int T = cfg_.T;
  Eigen::MatrixXd cur = Z;
  for (int s = static_cast<int>(nets_.size()) - 1; s >= 0; --s) {
    const auto perm = step_perm(s);
    Eigen::MatrixXd zp(B, T);
    for (int j = 0; j < T; ++j) zp.col(j) = cur.col(perm[j]);
    Eigen::MatrixXd xp = Eigen::MatrixXd::Zero(B, T);
    for (int j = 0; j < T; ++j) {
      Eigen::MatrixXd U(B, T + cfg_.c_dim);
      U.leftCols(T) = xp;
      if (cfg_.c_dim > 0) U.rightCols(cfg_.c_dim) = C;
      Eigen::MatrixXd out = nets_[s].forward(U);
      xp.col(j) =
          (zp.col(j) - out.col(2 * j + 1)).array() * (-out.col(2 * j).array()).exp();
    }
    for (int j = 0; j < T; ++j) cur.col(perm[j]) = xp.col(j);
  }
  return cur;
}

Eigen::MatrixXd ConditionalFlow::inverse_transform(const Eigen::MatrixXd& Z,
                                                   const Eigen::MatrixXd& C) const {
  check_batch(Z, C, cfg_.T, cfg_.c_dim);
  return cfg_.affine ? affine_inverse(Z, C) : mono_inverse(Z, C);
}

Eigen::MatrixXd ConditionalFlow::sample(const Eigen::VectorXd& c, int M, std::uint64_t seed,
                                        Eigen::VectorXd* log_densities) const {
  if (M < 1) throw std::invalid_argument("sample: M must be positive");
  if (c.size() != cfg_.c_dim) throw std::invalid_argument("sample: conditioning width mismatch");
  nn::Rng rng(seed);
  Eigen::MatrixXd Z = rng.normal_matrix(M, cfg_.T);
  Eigen::MatrixXd C(M, cfg_.c_dim);
  C.rowwise() = c.transpose();
  Eigen::MatrixXd X = inverse_transform(Z, C);
  if (log_densities) *log_densities = log_density(X, C);
  return X;
}

FitResult ConditionalFlow::fit(const Eigen::MatrixXd& X_ls, const Eigen::MatrixXd& C_ls,
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
  std::vector<int> idx(N);
  std::iota(idx.begin(), idx.end(), 0);

  FitResult res;
  double best_vs = std::numeric_limits<double>::infinity();
  std::vector<double> best_params;

  auto eval_nll = [&](const Eigen::MatrixXd& X, const Eigen::MatrixXd& C) {
    // chunked evaluation keeps the quadrature workspace bounded
    const int n = static_cast<int>(X.rows());
    double acc = 0.0;
    for (int at = 0; at < n; at += 256) {
      const int len = std::min(256, n - at);
      acc -= log_density(X.middleRows(at, len), C.middleRows(at, len)).sum();
    }
    return acc / n;
  };

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
      std::vector<nn::Grads> grads;
      const double nll = nll_and_gradients(Xb, Cb, grads);
      if (!std::isfinite(nll))
        throw std::runtime_error(
            "flow fit: non-finite training loss at epoch " + std::to_string(epoch) +
            "; consider lowering the learning rate");
      for (std::size_t i = 0; i < nets_.size(); ++i) opts[i].step(nets_[i], grads[i]);
      train_acc += nll;
      ++n_batches;
    }
    res.train_nll.push_back(train_acc / std::max(1, n_batches));

    if (X_vs.rows() > 0) {
      const double vs = eval_nll(X_vs, C_vs);
      res.vs_nll.push_back(vs);
      if (vs < best_vs) {
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

std::size_t ConditionalFlow::n_params() const {
  std::size_t n = 0;
  for (const auto& net : nets_) n += net.n_params();
  return n;
}

void ConditionalFlow::get_params(std::vector<double>& out) const {
  out.clear();
  std::vector<double> tmp;
  for (const auto& net : nets_) {
    net.get_params(tmp);
    out.insert(out.end(), tmp.begin(), tmp.end());
  }
}

void ConditionalFlow::set_params(const std::vector<double>& in) {
  if (in.size() != n_params()) throw std::invalid_argument("flow set_params: size mismatch");
  std::size_t off = 0;
  for (auto& net : nets_) {
    std::vector<double> tmp(in.begin() + off, in.begin() + off + net.n_params());
    net.set_params(tmp);
    off += net.n_params();
  }
}

}  // namespace scengen::flow
