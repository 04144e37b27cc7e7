#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace fptb {

struct GaussRule {
  std::vector<double> nodes;    // on (-1, 1)
  std::vector<double> weights;  // sum to 2
};

namespace detail {

// Gauss-Legendre nodes by Newton iteration on P_n; accurate to ~1e-15.
inline GaussRule build_gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace detail

inline const GaussRule& gauss_legendre(int n) {
  static std::map<int, GaussRule> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) {
    it = cache.emplace(n, detail::build_gauss_legendre(n)).first;
  }
  return it->second;
}

// n-point Gauss-Legendre approximation of the integral of f over [lo, hi].
template <class F>
double gauss_integrate(F&& f, double lo, double hi, int n) {
  const GaussRule& rule = gauss_legendre(n);
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
  }
  return acc * half;
}

// Composite rule over an ordered list of panel edges.
template <class F>
double gauss_integrate_panels(F&& f, const std::vector<double>& edges, int n) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    acc += gauss_integrate(f, edges[i], edges[i + 1], n);
  }
  return acc;
}

}  // namespace fptb
