#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "fptb/parallel.hpp"

namespace fptb {

// A Monte Carlo scalar estimate: sample mean, its standard error
// (sample standard deviation / sqrt(n)), and the sample count.
struct Estimate {
  double value = 0.0;
  double stderr_ = 0.0;
  std::uint64_t n_samples = 0;
};

// Compensated (Neumaier) summation; keeps block sums exact enough that the
// final reduction is independent of how work was split across threads.
class NeumaierSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double result() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

namespace detail {
constexpr std::uint64_t kMcBlock = 4096;
}

// Mean and standard error of f(i) over i in [0, n).  Work is split into
// fixed blocks; per-block partial sums are reduced in block order, so the
// result is bitwise identical for any worker count.
template <class PerSample>
Estimate mc_mean(std::uint64_t n, PerSample&& f) {
  const std::uint64_t nb = (n + detail::kMcBlock - 1) / detail::kMcBlock;
  std::vector<double> block_sum(nb), block_sumsq(nb);
  parallel_blocks(nb, [&](std::uint64_t b) {
    const std::uint64_t lo = b * detail::kMcBlock;
    const std::uint64_t hi = std::min(n, lo + detail::kMcBlock);
    NeumaierSum s, ss;
    for (std::uint64_t i = lo; i < hi; ++i) {
      const double x = f(i);
      s.add(x);
      ss.add(x * x);
    }
    block_sum[b] = s.result();
    block_sumsq[b] = ss.result();
  });
  NeumaierSum s, ss;
  for (std::uint64_t b = 0; b < nb; ++b) {
    s.add(block_sum[b]);
    ss.add(block_sumsq[b]);
  }
  const double sum = s.result();
  const double sumsq = ss.result();
  const double mean = sum / static_cast<double>(n);
  double stderr_ = 0.0;
  if (n > 1) {
    const double var =
        std::max(0.0, (sumsq - sum * mean) / static_cast<double>(n - 1));
    stderr_ = std::sqrt(var / static_cast<double>(n));
  }
  return Estimate{mean, stderr_, n};
}

}  // namespace fptb
