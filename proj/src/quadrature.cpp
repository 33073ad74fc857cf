#include "scengen/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace scengen::quad {

Rule clenshaw_curtis(int order) {
  if (order < 2) throw std::invalid_argument("clenshaw_curtis: order must be >= 2");
  const int n = order - 1;
  const double pi = std::acos(-1.0);
  Rule r;
  r.nodes.resize(order);
  r.weights.resize(order);
  for (int k = 0; k <= n; ++k) {
    r.nodes[k] = std::cos(static_cast<double>(k) * pi / n);
    double s = 0.0;
    for (int j = 1; j <= n / 2; ++j) {
      const double bj = (2 * j == n) ? 1.0 : 2.0;
      s += bj / (4.0 * j * j - 1.0) * std::cos(2.0 * j * k * pi / n);
    }
    const double ck = (k == 0 || k == n) ? 1.0 : 2.0;
    r.weights[k] = ck / n * (1.0 - s);
  }
  return r;
}

double integrate_zero_to(const Rule& rule, const std::function<double(double)>& f, double x) {
  double acc = 0.0;
  for (Eigen::Index k = 0; k < rule.nodes.size(); ++k)
    acc += rule.weights[k] * f(x * (rule.nodes[k] + 1.0) * 0.5);
  return 0.5 * x * acc;
}

}  // namespace scengen::quad
