#pragma once

#include <cmath>
#include <vector>

#include "sphmean/common.hpp"

namespace sphmean {

struct Quadrature1D {
  std::vector<double> nodes;
  std::vector<double> weights;
  int size() const { return static_cast<int>(nodes.size()); }
};

/// Gauss-Legendre rule on [-1,1]. Nodes are roots of P_n found by Newton
/// iteration from the Chebyshev-like initial guess; converges to machine
/// precision in a handful of steps for every order used here.
inline Quadrature1D gauss_legendre(int order) {
  if (order < 1) throw config_error("gauss_legendre: order must be >= 1");
  Quadrature1D q;
  q.nodes.resize(order);
  q.weights.resize(order);
  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      // Legendre recurrence for P_order(x) and its derivative.
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    q.nodes[i] = -x;
    q.weights[i] = w;
    q.nodes[order - 1 - i] = x;
    q.weights[order - 1 - i] = w;
  }
  return q;
}

inline Quadrature1D gauss_legendre(int order, double a, double b) {
  Quadrature1D q = gauss_legendre(order);
  const double mid = 0.5 * (a + b), rad = 0.5 * (b - a);
  for (int i = 0; i < q.size(); ++i) {
    q.nodes[i] = mid + rad * q.nodes[i];
    q.weights[i] *= rad;
  }
  return q;
}

/// Composite trapezoid weights for `count` equispaced samples spanning [a,b].
inline std::vector<double> trapezoid_weights(int count, double a, double b) {
  if (count < 2) throw config_error("trapezoid_weights: need at least 2 samples");
  const double h = (b - a) / (count - 1);
  std::vector<double> w(count, h);
  w.front() = 0.5 * h;
  w.back() = 0.5 * h;
  return w;
}

}  // namespace sphmean
