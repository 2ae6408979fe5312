#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

namespace spikes {

struct GaussLegendreRule {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;
};

// Nodes by Newton iteration on the three-term Legendre recurrence.
inline GaussLegendreRule make_gauss_legendre(std::size_t order) {
  GaussLegendreRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  const auto n = static_cast<double>(order);
  for (std::size_t i = 0; i < (order + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t j = 2; j <= order; ++j) {
        const auto jj = static_cast<double>(j);
        const double p2 = ((2.0 * jj - 1.0) * x * p1 - (jj - 1.0) * p0) / jj;
        p0 = p1;
        p1 = p2;
      }
      // p1 = P_n(x), p0 = P_{n-1}(x)
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[order - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[order - 1 - i] = w;
  }
  return rule;
}

inline const GaussLegendreRule& gauss_legendre_200() {
  static const GaussLegendreRule rule = make_gauss_legendre(200);
  return rule;
}

// Integrates f over [lo, hi] with the fixed 200-point rule.
template <typename F>
double integrate(F&& f, double lo, double hi) {
  const auto& rule = gauss_legendre_200();
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  double total = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    total += rule.weights[i] * f(mid + half * rule.nodes[i]);
  }
  return total * half;
}

}  // namespace spikes
