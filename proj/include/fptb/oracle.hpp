#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "fptb/boundary.hpp"
#include "fptb/errors.hpp"
#include "fptb/parallel.hpp"
#include "fptb/rng.hpp"

namespace fptb {
namespace oracle {

// Histogram of simulated hitting times on (0, horizon]; paths that do not
// hit by the horizon are tracked in n_not_hit, never dropped.
struct EmpiricalDistribution {
  std::vector<double> bin_edges;       // n_bins + 1 edges, 0 .. horizon
  std::vector<std::uint64_t> counts;   // n_bins
  std::uint64_t n_paths_total = 0;
  std::uint64_t n_not_hit = 0;

  // Empirical CDF evaluated at bin edge j (fraction of paths with T < edge).
  double cdf_at_edge(std::size_t j) const {
    std::uint64_t c = 0;
    for (std::size_t i = 0; i < j && i < counts.size(); ++i) c += counts[i];
    return static_cast<double>(c) / static_cast<double>(n_paths_total);
  }
};

namespace detail {

// Probability that a Brownian path with endpoint distances d0, d1 > 0 from
// a locally frozen boundary crossed it inside a step of length dt.
inline double step_crossing_prob(double d0, double d1, double dt) {
  if (d0 <= 0.0 || d1 <= 0.0) return 1.0;
  return std::exp(-2.0 * d0 * d1 / dt);
}

}  // namespace detail

// Direct simulation of T = inf{t : B_t = f(t)} by Euler paths of B with the
// Brownian-bridge crossing correction: a step is a hit either when
// f(t) - B(t) changes sign or, with probability exp(-2 d_k d_{k+1} / dt),
// when the bridge crossed the locally frozen boundary between grid points.
// Hits are recorded at the step midpoint.
inline EmpiricalDistribution simulate_fpt(const Boundary& b, double horizon,
                                          std::uint64_t n_paths,
                                          std::size_t n_steps,
                                          std::uint64_t seed,
                                          std::size_t n_bins = 200,
                                          bool bridge_correction = true) {
  if (!(horizon > 0.0)) throw std::invalid_argument("simulate_fpt: horizon must be > 0");
  if (n_paths < 1) throw std::invalid_argument("simulate_fpt: n_paths must be >= 1");
  if (n_steps < 2) throw std::invalid_argument("simulate_fpt: n_steps must be >= 2");
  if (n_bins < 1) throw std::invalid_argument("simulate_fpt: n_bins must be >= 1");
  if (!(b.a() > 0.0)) {
    throw std::invalid_argument("simulate_fpt: boundary must start above 0");
  }

  const double dt = horizon / static_cast<double>(n_steps);
  const double sqrt_dt = std::sqrt(dt);
  std::vector<double> f_grid(n_steps + 1);
  for (std::size_t k = 0; k <= n_steps; ++k) {
    f_grid[k] = b.f(dt * static_cast<double>(k));
  }

  constexpr std::uint64_t kBlock = 1024;
  const std::uint64_t nb = (n_paths + kBlock - 1) / kBlock;
  std::vector<std::vector<std::uint64_t>> block_counts(nb);
  std::vector<std::uint64_t> block_not_hit(nb, 0);

  parallel_blocks(nb, [&](std::uint64_t blk) {
    std::vector<std::uint64_t> counts(n_bins, 0);
    std::uint64_t not_hit = 0;
    const std::uint64_t lo = blk * kBlock;
    const std::uint64_t hi = std::min<std::uint64_t>(n_paths, lo + kBlock);
    for (std::uint64_t i = lo; i < hi; ++i) {
      RngStream rng(seed, i);
      double bm = 0.0;
      double d_prev = f_grid[0];
      bool hit = false;
      for (std::size_t k = 0; k < n_steps; ++k) {
        bm += sqrt_dt * rng.normal();
        const double d = f_grid[k + 1] - bm;
        bool crossed = d <= 0.0;
        if (!crossed && bridge_correction) {
          const double p = detail::step_crossing_prob(d_prev, d, dt);
          if (p > 1e-18 && rng.uniform() < p) crossed = true;
        }
        if (crossed) {
          const double t_hit = dt * (static_cast<double>(k) + 0.5);
          const auto bin = std::min<std::size_t>(
              static_cast<std::size_t>(t_hit / horizon * n_bins), n_bins - 1);
          ++counts[bin];
          hit = true;
          break;
        }
        d_prev = d;
      }
      if (!hit) ++not_hit;
    }
    block_counts[blk] = std::move(counts);
    block_not_hit[blk] = not_hit;
  });

  EmpiricalDistribution dist;
  dist.n_paths_total = n_paths;
  dist.bin_edges.resize(n_bins + 1);
  for (std::size_t j = 0; j <= n_bins; ++j) {
    dist.bin_edges[j] = horizon * static_cast<double>(j) / static_cast<double>(n_bins);
  }
  dist.counts.assign(n_bins, 0);
  for (std::uint64_t blk = 0; blk < nb; ++blk) {
    for (std::size_t j = 0; j < n_bins; ++j) dist.counts[j] += block_counts[blk][j];
    dist.n_not_hit += block_not_hit[blk];
  }
  return dist;
}

// Closed-form first-passage density for the linear boundary a + slope * t:
//
//   a / sqrt(2 pi s^3) * exp(-(a + slope s)^2 / (2 s))
//     == h(s, a) * exp(-a slope - slope^2 s / 2).
inline double linear_density(double a, double slope, double s) {
  if (!(s > 0.0)) throw std::domain_error("linear_density: s must be > 0");
  if (!(a > 0.0)) throw std::invalid_argument("linear_density: a must be > 0");
  const double z = a + slope * s;
  return a / std::sqrt(2.0 * std::numbers::pi * s * s * s) *
         std::exp(-z * z / (2.0 * s));
}

// Closed-form CDF companion to linear_density (standard reflection /
// Girsanov result expressed through the normal CDF).
inline double linear_cdf(double a, double slope, double t) {
  if (!(a > 0.0)) throw std::invalid_argument("linear_cdf: a must be > 0");
  if (t <= 0.0) return 0.0;
  const auto phi = [](double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); };
  const double rt = std::sqrt(t);
  return phi(-(a + slope * t) / rt) +
         std::exp(-2.0 * a * slope) * phi((slope * t - a) / rt);
}

// Sup over bin edges of |empirical CDF - model CDF|.
template <class ModelCdf>
double compare(const EmpiricalDistribution& e, ModelCdf&& model_cdf) {
  double sup = 0.0;
  for (std::size_t j = 0; j < e.bin_edges.size(); ++j) {
    const double diff = std::abs(e.cdf_at_edge(j) - model_cdf(e.bin_edges[j]));
    sup = std::max(sup, diff);
  }
  return sup;
}

}  // namespace oracle
}  // namespace fptb
