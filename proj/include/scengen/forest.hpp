#pragma once
// Extremely randomized trees for binary classification, plus ROC/AUC helpers.
//
// Each tree is grown on the full sample (no bootstrap): at every node a
// random subset of features is drawn, each gets one uniform random cut
// between its node-local min and max, and the cut with the largest Gini
// decrease wins. Growth stops on purity or when fewer than min_samples_split
// rows remain.

#include "scengen/nn.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <utility>
#include <vector>

namespace scengen::forest {

struct ForestOptions {
  int n_trees = 1000;
  int min_samples_split = 2;
  int k_features = 0;  // 0: round(sqrt(F))
  std::uint64_t seed = 1;
};

class ExtraTrees {
 public:
  // X is rows x features; y holds 0/1 labels
  void fit(const Eigen::MatrixXd& X, const std::vector<int>& y, const ForestOptions& opt);

  // per-row probability of class 1 (mean of leaf class-1 fractions)
  Eigen::VectorXd predict_proba(const Eigen::MatrixXd& X) const;

  std::size_t n_trees() const { return trees_.size(); }

 private:
  struct Node {
    int feature = -1;      // -1 marks a leaf
    double threshold = 0;  // go left when x[feature] < threshold
    int left = -1, right = -1;
    double p1 = 0;  // class-1 fraction at a leaf
  };
  struct Tree {
    std::vector<Node> nodes;
  };

  std::vector<Tree> trees_;
  int n_features_ = 0;

  int grow(Tree& tree, const Eigen::MatrixXd& X, const std::vector<int>& y,
           std::vector<int>& rows, int k, int min_split, nn::Rng& rng) const;
};

// Mann-Whitney AUC with average ranks on ties; labels are 0/1.
double auc_from_scores(const Eigen::VectorXd& scores, const std::vector<int>& labels);

// ROC points (fpr, tpr) sweeping thresholds from high to low, ending at (1,1).
std::vector<std::pair<double, double>> roc_points(const Eigen::VectorXd& scores,
                                                  const std::vector<int>& labels);

}  // namespace scengen::forest
