#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fptb/boundary.hpp"
#include "fptb/rng.hpp"
#include "fptb/stats.hpp"

namespace fptb {

// A sampled path on the uniform grid t_k = k * s / n_steps.
struct PathGrid {
  double s = 0.0;
  std::size_t n_steps = 0;
  std::vector<double> values;  // n_steps + 1 entries

  double dt() const { return s / static_cast<double>(n_steps); }
  double time(std::size_t k) const {
    return s * static_cast<double>(k) / static_cast<double>(n_steps);
  }
};

// Monte Carlo run parameters.  Identical values give identical estimates,
// bit for bit, independent of the worker count.
struct McConfig {
  std::uint64_t n_paths = 100000;
  std::size_t n_steps = 256;
  std::uint64_t seed = 0;
};

namespace bridge {

namespace detail {

// Exact one-time marginal of the Bessel(3) bridge from a (time 0) to 0
// (time s): the norm of a 3-d Gaussian with mean (a(1-u/s), 0, 0) and
// per-component variance u(s-u)/s.  This is the same norm-of-Brownian-
// bridge construction as sample_exact, restricted to a single time.
inline double marginal_at(double a, double s, double u, RngStream& rng) {
  const double mean = a * (1.0 - u / s);
  const double sigma = std::sqrt(u * (s - u) / s);
  const double c1 = mean + sigma * rng.normal();
  const double c2 = sigma * rng.normal();
  const double c3 = sigma * rng.normal();
  return std::sqrt(c1 * c1 + c2 * c2 + c3 * c3);
}

inline void check_bridge_args(double a, double s) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw std::invalid_argument("bridge: start level a must be > 0");
  }
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw std::invalid_argument("bridge: terminal time s must be > 0");
  }
}

}  // namespace detail

// Exact-in-distribution sampler: the Bessel(3) bridge from a to 0 over
// [0, s] realized as the Euclidean norm of a 3-d Brownian bridge from
// (a, 0, 0) to the origin.  Endpoints are pinned exactly: values[0] = a,
// values[n_steps] = 0.
inline PathGrid sample_exact(double a, double s, std::size_t n_steps,
                             RngStream& rng) {
  detail::check_bridge_args(a, s);
  if (n_steps < 2) {
    throw std::invalid_argument("sample_exact: n_steps must be >= 2");
  }
  PathGrid path;
  path.s = s;
  path.n_steps = n_steps;
  path.values.resize(n_steps + 1);
  path.values[0] = a;
  const double dt = s / static_cast<double>(n_steps);
  double b1 = 0.0, b2 = 0.0, b3 = 0.0;
  for (std::size_t k = 0; k + 1 < n_steps; ++k) {
    // Sequential bridge transition for each component: a Brownian bridge
    // pinned to 0 at s moves from b to N(b*(s-t-dt)/(s-t), dt*(s-t-dt)/(s-t)).
    const double s_minus_t = s - static_cast<double>(k) * dt;
    const double shrink = (s_minus_t - dt) / s_minus_t;
    const double sd = std::sqrt(dt * shrink);
    b1 = b1 * shrink + sd * rng.normal();
    b2 = b2 * shrink + sd * rng.normal();
    b3 = b3 * shrink + sd * rng.normal();
    const double t_next = static_cast<double>(k + 1) * dt;
    const double c1 = b1 + a * (1.0 - t_next / s);
    path.values[k + 1] = std::sqrt(c1 * c1 + b2 * b2 + b3 * b3);
  }
  path.values[n_steps] = 0.0;
  return path;
}

// Euler-Maruyama discretization of dX = dW + (1/X - X/(s-t)) dt on
// [0, s(1 - 1/n_steps)], with reflection at eps to keep the path positive
// and the final point pinned to 0.  Kept only as an independent check on
// sample_exact; the drift is singular near the pinning time, so this
// scheme is biased there.
inline PathGrid sample_euler(double a, double s, std::size_t n_steps,
                             RngStream& rng) {
  detail::check_bridge_args(a, s);
  if (n_steps < 8) {
    throw std::invalid_argument("sample_euler: n_steps must be >= 8");
  }
  constexpr double kEps = 1e-8;
  PathGrid path;
  path.s = s;
  path.n_steps = n_steps;
  path.values.resize(n_steps + 1);
  path.values[0] = a;
  const double dt = s / static_cast<double>(n_steps);
  const double sqrt_dt = std::sqrt(dt);
  double x = a;
  for (std::size_t k = 0; k + 1 < n_steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    x += (1.0 / x - x / (s - t)) * dt + sqrt_dt * rng.normal();
    if (x < kEps) x = 2.0 * kEps - x;
    path.values[k + 1] = x;
  }
  path.values[n_steps] = 0.0;
  return path;
}

// Trapezoidal approximation of int_0^s f''(u) X(u) du on the path's grid.
inline double path_functional(const PathGrid& path, const Boundary& b) {
  const double dt = path.dt();
  double acc = 0.5 * b.fpp(0.0) * path.values[0];
  for (std::size_t k = 1; k < path.n_steps; ++k) {
    acc += b.fpp(path.time(k)) * path.values[k];
  }
  acc += 0.5 * b.fpp(path.s) * path.values[path.n_steps];
  return acc * dt;
}

// Monte Carlo estimate of E[X_u] for the Bessel(3) bridge from a to 0 over
// [0, s], one independent stream per path.  u = 0 and u = s are exact.
inline Estimate bridge_mean(double a, double s, double u, const McConfig& cfg) {
  detail::check_bridge_args(a, s);
  if (!(u >= 0.0) || u > s) {
    throw std::invalid_argument("bridge_mean: need 0 <= u <= s");
  }
  if (u == 0.0) return Estimate{a, 0.0, cfg.n_paths};
  if (u == s) return Estimate{0.0, 0.0, cfg.n_paths};
  return mc_mean(cfg.n_paths, [&](std::uint64_t i) {
    RngStream rng(cfg.seed, i);
    return detail::marginal_at(a, s, u, rng);
  });
}

}  // namespace bridge
}  // namespace fptb
