#include "scengen/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace scengen::forest {

namespace {

// binary Gini impurity 2p(1-p)
double gini(long c1, long n) {
  if (n == 0) return 0.0;
  const double p = static_cast<double>(c1) / n;
  return 2.0 * p * (1.0 - p);
}

}  // namespace

int ExtraTrees::grow(Tree& tree, const Eigen::MatrixXd& X, const std::vector<int>& y,
                     std::vector<int>& rows, int k, int min_split, nn::Rng& rng) const {
  const int idx = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();

  const long n = static_cast<long>(rows.size());
  long c1 = 0;
  for (int r : rows) c1 += y[r];

  auto make_leaf = [&]() {
    tree.nodes[idx].p1 = static_cast<double>(c1) / n;
    return idx;
  };
  if (n < min_split || c1 == 0 || c1 == n) return make_leaf();

  std::vector<int> feats(n_features_);
  std::iota(feats.begin(), feats.end(), 0);
  rng.shuffle(feats);

  // try k non-constant features, each with one uniform cut
  int best_f = -1;
  double best_cut = 0.0, best_score = -1.0;
  int taken = 0;
  for (int f : feats) {
    if (taken == k) break;
    double lo = X(rows[0], f), hi = lo;
    for (int r : rows) {
      lo = std::min(lo, X(r, f));
      hi = std::max(hi, X(r, f));
    }
    if (!(hi > lo)) continue;
    ++taken;
    const double cut = lo + rng.uniform() * (hi - lo);
    long nl = 0, c1l = 0;
    for (int r : rows) {
      if (X(r, f) < cut) {
        ++nl;
        c1l += y[r];
      }
    }
    if (nl == 0 || nl == n) continue;
    const double score = gini(c1, n) - (static_cast<double>(nl) / n) * gini(c1l, nl) -
                         (static_cast<double>(n - nl) / n) * gini(c1 - c1l, n - nl);
    if (score > best_score) {
      best_score = score;
      best_f = f;
      best_cut = cut;
    }
  }
  if (best_f < 0) return make_leaf();

  std::vector<int> left, right;
  left.reserve(rows.size());
  right.reserve(rows.size());
  for (int r : rows) (X(r, best_f) < best_cut ? left : right).push_back(r);
  rows.clear();
  rows.shrink_to_fit();

  const int li = grow(tree, X, y, left, k, min_split, rng);
  const int ri = grow(tree, X, y, right, k, min_split, rng);
  tree.nodes[idx].feature = best_f;
  tree.nodes[idx].threshold = best_cut;
  tree.nodes[idx].left = li;
  tree.nodes[idx].right = ri;
  return idx;
}

void ExtraTrees::fit(const Eigen::MatrixXd& X, const std::vector<int>& y,
                     const ForestOptions& opt) {
  if (X.rows() == 0) throw std::invalid_argument("extra trees: empty training set");
  if (static_cast<std::size_t>(X.rows()) != y.size())
    throw std::invalid_argument("extra trees: label count mismatch");
  for (int v : y)
    if (v != 0 && v != 1) throw std::invalid_argument("extra trees: labels must be 0/1");

  n_features_ = static_cast<int>(X.cols());
  const int k = opt.k_features > 0
                    ? std::min(opt.k_features, n_features_)
                    : std::max(1, static_cast<int>(std::lround(std::sqrt(n_features_))));

  trees_.assign(opt.n_trees, {});
  for (int t = 0; t < opt.n_trees; ++t) {
    // per-tree stream: tree i is reproducible regardless of forest size
    nn::Rng rng(opt.seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(t));
    std::vector<int> rows(X.rows());
    std::iota(rows.begin(), rows.end(), 0);
    grow(trees_[t], X, y, rows, k, opt.min_samples_split, rng);
  }
}

Eigen::VectorXd ExtraTrees::predict_proba(const Eigen::MatrixXd& X) const {
  if (trees_.empty()) throw std::logic_error("extra trees: predict before fit");
  if (X.cols() != n_features_) throw std::invalid_argument("extra trees: feature count mismatch");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(X.rows());
  for (const auto& tree : trees_) {
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      int at = 0;
      while (tree.nodes[at].feature >= 0)
        at = X(i, tree.nodes[at].feature) < tree.nodes[at].threshold ? tree.nodes[at].left
                                                                     : tree.nodes[at].right;
      out[i] += tree.nodes[at].p1;
    }
  }
  return out / static_cast<double>(trees_.size());
}

double auc_from_scores(const Eigen::VectorXd& scores, const std::vector<int>& labels) {
  const std::size_t n = labels.size();
  if (static_cast<std::size_t>(scores.size()) != n)
    throw std::invalid_argument("auc: score/label size mismatch");
  long n1 = 0;
  for (int v : labels) n1 += v;
  const long n0 = static_cast<long>(n) - n1;
  if (n0 == 0 || n1 == 0) throw std::invalid_argument("auc: needs both classes");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return scores[a] < scores[b]; });

  // Mann-Whitney rank sum with average ranks on ties
  double rank_sum_1 = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t t = i; t <= j; ++t)
      if (labels[order[t]] == 1) rank_sum_1 += avg_rank;
    i = j + 1;
  }
  return (rank_sum_1 - 0.5 * n1 * (n1 + 1.0)) / (static_cast<double>(n0) * n1);
}

std::vector<std::pair<double, double>> roc_points(const Eigen::VectorXd& scores,
                                                  const std::vector<int>& labels) {
  const std::size_t n = labels.size();
  if (static_cast<std::size_t>(scores.size()) != n)
    throw std::invalid_argument("roc: score/label size mismatch");
  long n1 = 0;
  for (int v : labels) n1 += v;
  const long n0 = static_cast<long>(n) - n1;
  if (n0 == 0 || n1 == 0) throw std::invalid_argument("roc: needs both classes");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return scores[a] > scores[b]; });

  std::vector<std::pair<double, double>> pts{{0.0, 0.0}};
  long tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    for (std::size_t t = i; t <= j; ++t) (labels[order[t]] == 1 ? tp : fp)++;
    pts.emplace_back(static_cast<double>(fp) / n0, static_cast<double>(tp) / n1);
    i = j + 1;
  }
  return pts;
}

}  // namespace scengen::forest
