#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "fptb/boundary.hpp"
#include "fptb/bridge.hpp"
#include "fptb/errors.hpp"
#include "fptb/quadrature.hpp"
#include "fptb/rng.hpp"
#include "fptb/stats.hpp"

namespace fptb {
namespace fpt {

namespace detail {

inline void require_valid(const Boundary& b, double s) {
  const ValidationReport report = b.validate(s);
  if (!report.passed) {
    std::ostringstream msg;
    msg << "boundary failed validation on [0, " << s << "]:";
    for (const auto& r : report.reasons) msg << " " << r << ";";
    throw ValidationError(msg.str());
  }
}

inline void require_mc(const McConfig& cfg) {
  if (cfg.n_paths < 1) throw std::invalid_argument("McConfig: n_paths must be >= 1");
  if (cfg.n_steps < 2) throw std::invalid_argument("McConfig: n_steps must be >= 2");
}

// The deterministic factor multiplying the bridge expectation in the
// first-passage density: exp(-1/2 int_0^s (f')^2 du - f'(0) a) * h(s, a).
inline double density_prefactor(const Boundary& b, double s) {
  return std::exp(-0.5 * b.integral_fp_sq(0.0, s) - b.fp(0.0) * b.a()) *
         level_density(s, b.a());
}

// Monte Carlo mean of exp(-int_0^s f''(u) X_u du) without re-validating
// the boundary; per-step transition constants are hoisted out of the
// path loop, and the same (seed, path) streams are used for every s so
// that estimates are common-random-number coupled across an s-grid.
inline Estimate expectation_term_unchecked(const Boundary& b, double s,
                                           const McConfig& cfg) {
  if (b.is_linear()) return Estimate{1.0, 0.0, cfg.n_paths};
  const std::size_t n = cfg.n_steps;
  const double dt = s / static_cast<double>(n);
  std::vector<double> shrink(n), sd(n), drift(n), weight(n);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double s_minus_t = s - static_cast<double>(k) * dt;
    shrink[k] = (s_minus_t - dt) / s_minus_t;
    sd[k] = std::sqrt(dt * shrink[k]);
    const double t_next = static_cast<double>(k + 1) * dt;
    drift[k] = b.a() * (1.0 - t_next / s);
    weight[k] = b.fpp(t_next) * dt;  // interior trapezoid weight
  }
  // Endpoint contributions: X(0) = a exactly, X(s) = 0 exactly.
  const double base = 0.5 * b.fpp(0.0) * b.a() * dt;
  return mc_mean(cfg.n_paths, [&](std::uint64_t i) {
    RngStream rng(cfg.seed, i);
    double b1 = 0.0, b2 = 0.0, b3 = 0.0;
    double acc = base;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      b1 = b1 * shrink[k] + sd[k] * rng.normal();
      b2 = b2 * shrink[k] + sd[k] * rng.normal();
      b3 = b3 * shrink[k] + sd[k] * rng.normal();
      const double c1 = b1 + drift[k];
      acc += weight[k] * std::sqrt(c1 * c1 + b2 * b2 + b3 * b3);
    }
    return std::exp(-acc);
  });
}

}  // namespace detail

// E[exp(-int_0^s f''(u) X_u du)] over Bessel(3) bridge paths from a = f(0)
// to 0; always in [0, 1].  Exactly 1 with zero stderr for linear
// boundaries (f'' == 0).
inline Estimate expectation_term(const Boundary& b, double s,
                                 const McConfig& cfg) {
  if (!(s > 0.0)) throw std::invalid_argument("expectation_term: s must be > 0");
  detail::require_mc(cfg);
  detail::require_valid(b, s);
  return detail::expectation_term_unchecked(b, s, cfg);
}

// First-passage-time density at s:
//
//   p(s) = E[exp(-int_0^s f'' X du)]
//          * exp(-1/2 int_0^s (f')^2 du - f'(0) a) * h(s, a),
//
// with the standard error scaled by the same deterministic factor.
inline Estimate density_at(const Boundary& b, double s, const McConfig& cfg) {
  if (!(s > 0.0)) throw std::invalid_argument("density_at: s must be > 0");
  detail::require_mc(cfg);
  detail::require_valid(b, s);
  const double factor = detail::density_prefactor(b, s);
  // The h(s,a) factor is doubly-exponentially small near s = 0; below this
  // threshold the product cannot rise above underflow-noise level, so the
  // bridge sampling is skipped and the density reported as exactly 0.
  if (factor < 1e-250) return Estimate{0.0, 0.0, cfg.n_paths};
  const Estimate e = detail::expectation_term_unchecked(b, s, cfg);
  return Estimate{factor * e.value, factor * e.stderr_, e.n_samples};
}

// P(T < t) by composite Gauss-Legendre quadrature of density_at over
// (0, t], split at the mode a^2/3 of h to resolve the boundary layer near
// s = 0 (the integrand is extended by 0 at s = 0).  The standard error is
// the weighted sum of node standard errors: nodes share bridge noise, so
// they are treated as perfectly correlated.
inline Estimate cdf(const Boundary& b, double t, const McConfig& cfg,
                    int n_quad) {
  if (!(t > 0.0)) throw std::invalid_argument("cdf: t must be > 0");
  if (n_quad < 16) throw std::invalid_argument("cdf: n_quad must be >= 16");
  detail::require_mc(cfg);
  detail::require_valid(b, t);
  const double mode = b.a() * b.a() / 3.0;
  std::vector<double> edges{0.0};
  if (mode < t) edges.push_back(mode);
  edges.push_back(t);

  const GaussRule& rule = gauss_legendre(n_quad);
  double value = 0.0;
  double stderr_ = 0.0;
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double mid = 0.5 * (edges[p] + edges[p + 1]);
    const double half = 0.5 * (edges[p + 1] - edges[p]);
    for (int i = 0; i < n_quad; ++i) {
      const double sx = mid + half * rule.nodes[i];
      const Estimate d = density_at(b, sx, cfg);
      value += half * rule.weights[i] * d.value;
      stderr_ += half * rule.weights[i] * d.stderr_;
    }
  }
  if (value > 1.0) {
    if (value > 1.0 + 3.0 * stderr_ + 1e-9) {
      throw NumericalError("cdf: quadrature exceeded 1 beyond noise level");
    }
    value = 1.0;
  }
  value = std::max(value, 0.0);
  return Estimate{value, stderr_, cfg.n_paths};
}

struct Bounds {
  double lower = 0.0;
  double upper = 0.0;
  double lower_stderr = 0.0;  // Monte Carlo error of the bridge-mean integral
};

// Analytic sandwich for the density at s:
//
//   upper = h(s,a) exp(-a f'(0) - 1/2 int_0^s (f')^2 du)
//   lower = upper * exp(-int_0^s f''(u) E[X_u] du)
//
// E[X_u] estimated by bridge_mean on a 64-interval trapezoid grid; the
// endpoints u = 0 and u = s are exact.  Both bounds collapse onto the
// density for linear boundaries.
inline Bounds bounds_at(const Boundary& b, double s, const McConfig& cfg) {
  if (!(s > 0.0)) throw std::invalid_argument("bounds_at: s must be > 0");
  detail::require_mc(cfg);
  detail::require_valid(b, s);
  const double upper = detail::density_prefactor(b, s);
  if (b.is_linear()) return Bounds{upper, upper, 0.0};

  constexpr int kIntervals = 64;
  const double du = s / kIntervals;
  double integral = 0.5 * du * b.fpp(0.0) * b.a();  // E[X_0] = a, stderr 0
  double integral_stderr = 0.0;
  for (int j = 1; j < kIntervals; ++j) {
    const double u = du * j;
    const Estimate m = bridge::bridge_mean(b.a(), s, u, cfg);
    integral += du * b.fpp(u) * m.value;
    integral_stderr += du * b.fpp(u) * m.stderr_;
  }
  // u = s contributes 0 exactly.
  const double lower = upper * std::exp(-integral);
  return Bounds{lower, upper, lower * integral_stderr};
}

struct DensityCurve {
  std::vector<double> times;
  std::vector<Estimate> density;
  std::vector<double> lower;
  std::vector<double> upper;
};

// Density and bounds on the uniform grid s_j = j * t_max / n_points,
// j = 1..n_points.  All points share the same noise streams (common random
// numbers), so the curve is smooth in s and deterministic per seed.
inline DensityCurve density_curve(const Boundary& b, double t_max,
                                  std::size_t n_points, const McConfig& cfg) {
  if (!(t_max > 0.0)) throw std::invalid_argument("density_curve: t_max must be > 0");
  if (n_points < 2) throw std::invalid_argument("density_curve: n_points must be >= 2");
  detail::require_mc(cfg);
  detail::require_valid(b, t_max);
  DensityCurve curve;
  curve.times.reserve(n_points);
  for (std::size_t j = 1; j <= n_points; ++j) {
    const double s = t_max * static_cast<double>(j) / static_cast<double>(n_points);
    curve.times.push_back(s);
    curve.density.push_back(density_at(b, s, cfg));
    const Bounds bounds = bounds_at(b, s, cfg);
    curve.lower.push_back(bounds.lower);
    curve.upper.push_back(bounds.upper);
  }
  return curve;
}

// Smooth model CDF over (0, t_max].  The bridge expectation E(s), an
// analytic function of sqrt(s), is sampled at Chebyshev nodes in x =
// sqrt(s) and interpolated barycentrically; the deterministic factors
// (exp term and h) are evaluated exactly under a fine fixed composite
// Gauss-Legendre rule.  This gives the whole curve for the cost of
// n_nodes Monte Carlo runs.
class CdfCurve {
 public:
  CdfCurve(Boundary b, double t_max, int n_nodes, const McConfig& cfg)
      : boundary_(std::move(b)), t_max_(t_max) {
    if (!(t_max > 0.0)) throw std::invalid_argument("CdfCurve: t_max must be > 0");
    if (n_nodes < 4) throw std::invalid_argument("CdfCurve: n_nodes must be >= 4");
    detail::require_mc(cfg);
    detail::require_valid(boundary_, t_max);

    const double x_hi = std::sqrt(t_max);
    nodes_x_.resize(n_nodes);
    values_.resize(n_nodes);
    bary_w_.resize(n_nodes);
    for (int i = 0; i < n_nodes; ++i) {
      const double theta = std::numbers::pi * (i + 0.5) / n_nodes;
      nodes_x_[i] = 0.5 * x_hi * (1.0 + std::cos(theta));
      bary_w_[i] = (i % 2 == 0 ? 1.0 : -1.0) * std::sin(theta);
    }
    for (int i = 0; i < n_nodes; ++i) {
      const double s = nodes_x_[i] * nodes_x_[i];
      values_[i] =
          s > 0.0 ? detail::expectation_term_unchecked(boundary_, s, cfg).value
                  : 1.0;
    }

    // Prefix integrals of the full integrand on a fixed fine segmentation.
    seg_ = t_max / kSegments;
    prefix_.assign(kSegments + 1, 0.0);
    for (int k = 0; k < kSegments; ++k) {
      prefix_[k + 1] = prefix_[k] + gauss_integrate(
                                        [this](double s) { return integrand(s); },
                                        seg_ * k, seg_ * (k + 1), 8);
    }
  }

  double t_max() const { return t_max_; }

  double operator()(double t) const {
    if (t <= 0.0) return 0.0;
    if (t > t_max_ * (1.0 + 1e-12)) {
      throw std::invalid_argument("CdfCurve: t beyond tabulated range");
    }
    t = std::min(t, t_max_);
    const int k = std::min(static_cast<int>(t / seg_), kSegments - 1);
    double v = prefix_[k];
    v += gauss_integrate([this](double s) { return integrand(s); }, seg_ * k, t, 8);
    return std::clamp(v, 0.0, 1.0);
  }

 private:
  static constexpr int kSegments = 512;

  double expectation_interp(double x) const {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < nodes_x_.size(); ++i) {
      const double d = x - nodes_x_[i];
      if (std::abs(d) < 1e-14) return values_[i];
      const double w = bary_w_[i] / d;
      num += w * values_[i];
      den += w;
    }
    return std::clamp(num / den, 0.0, 1.0);
  }

  double integrand(double s) const {
    if (s <= 0.0) return 0.0;
    const double factor = detail::density_prefactor(boundary_, s);
    if (factor < 1e-250) return 0.0;
    return factor * expectation_interp(std::sqrt(s));
  }

  Boundary boundary_;
  double t_max_ = 0.0;
  double seg_ = 0.0;
  std::vector<double> nodes_x_;
  std::vector<double> values_;
  std::vector<double> bary_w_;
  std::vector<double> prefix_;
};

inline CdfCurve make_cdf_curve(const Boundary& b, double t_max, int n_nodes,
                               const McConfig& cfg) {
  return CdfCurve(b, t_max, n_nodes, cfg);
}

}  // namespace fpt
}  // namespace fptb
