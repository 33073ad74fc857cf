#pragma once
// Clenshaw-Curtis quadrature on [-1, 1] plus the oriented integral from 0 to x
// used by the monotone flow transforms.

#include <Eigen/Dense>

#include <functional>

namespace scengen::quad {

struct Rule {
  Eigen::VectorXd nodes;    // in [-1, 1], size = order
  Eigen::VectorXd weights;  // sum to 2
};

// Clenshaw-Curtis rule with `order` nodes (order >= 2). Exact for polynomials
// of degree < order.
Rule clenshaw_curtis(int order);

// Oriented integral of f from 0 to x: negative x flips the sign naturally
// through the affine node map t = x*(s+1)/2.
double integrate_zero_to(const Rule& rule, const std::function<double(double)>& f, double x);

}  // namespace scengen::quad
