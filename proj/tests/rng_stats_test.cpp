#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

#include "fptb/parallel.hpp"
#include "fptb/quadrature.hpp"
#include "fptb/rng.hpp"
#include "fptb/stats.hpp"
#include "support/test_utils.hpp"

using fptb::Estimate;
using fptb::NeumaierSum;
using fptb::RngStream;

namespace {

// Box-Muller reference sampler, independent of the ziggurat path.
class BoxMullerRef {
 public:
  BoxMullerRef(std::uint64_t seed, std::uint64_t stream) : rng_(seed, stream) {}
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = rng_.uniform();
    const double u2 = rng_.uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  RngStream rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace

TEST_CASE("streams are deterministic and distinct") {
  RngStream a(123, 5), b(123, 5), c(123, 6), d(124, 5);
  bool all_equal = true;
  bool c_differs = false;
  bool d_differs = false;
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t va = a.next_u64();
    all_equal = all_equal && (va == b.next_u64());
    c_differs = c_differs || (va != c.next_u64());
    d_differs = d_differs || (va != d.next_u64());
  }
  CHECK(all_equal);
  CHECK(c_differs);
  CHECK(d_differs);
}

TEST_CASE("stream output is stable across builds") {
  // Frozen first outputs of stream (seed 42, id 7); a change here means the
  // generator algorithm changed and every seeded result in the project moved.
  RngStream rng(42, 7);
  CHECK(rng.next_u64() == UINT64_C(16524851402832244524));
  CHECK(rng.next_u64() == UINT64_C(6157433149371370037));
  CHECK(rng.next_u64() == UINT64_C(6921858453021256000));
  CHECK(rng.next_u64() == UINT64_C(3210741326099118321));
}

TEST_CASE("uniforms live strictly inside (0,1) with the right moments") {
  RngStream rng(7, 0);
  const int n = 1000000;
  double sum = 0.0, sumsq = 0.0, lo = 1.0, hi = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    sum += u;
    sumsq += u * u;
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);
  CHECK(std::abs(mean - 0.5) < 5.0 * std::sqrt(1.0 / 12.0 / n));
  CHECK(std::abs(var - 1.0 / 12.0) < 5.0 * 1.2 / std::sqrt(12.0 * n));
}

TEST_CASE("ziggurat normals have standard-normal moments and tails") {
  RngStream rng(2024, 0);
  const int n = 10000000;
  double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
  int tail3 = 0, tail4 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s1 += z;
    s2 += z * z;
    s3 += z * z * z;
    s4 += z * z * z * z;
    if (std::abs(z) > 3.0) ++tail3;
    if (std::abs(z) > 4.0) ++tail4;
  }
  const double rn = static_cast<double>(n);
  CHECK(std::abs(s1 / rn) < 5.0 / std::sqrt(rn));
  CHECK(std::abs(s2 / rn - 1.0) < 5.0 * std::sqrt(2.0 / rn));
  CHECK(std::abs(s3 / rn) < 5.0 * std::sqrt(15.0 / rn));
  CHECK(std::abs(s4 / rn - 3.0) < 5.0 * std::sqrt(96.0 / rn));
  // P(|Z| > 3) = 2.69980e-3, P(|Z| > 4) = 6.3342e-5
  const double p3 = 2.6998e-3, p4 = 6.3342e-5;
  CHECK(std::abs(tail3 / rn - p3) < 5.0 * std::sqrt(p3 / rn));
  CHECK(std::abs(tail4 / rn - p4) < 5.0 * std::sqrt(p4 / rn));
}

TEST_CASE("ziggurat normals pass a KS test against the normal CDF") {
  RngStream rng(99, 1);
  const int n = 1000000;
  std::vector<double> sample(n);
  for (auto& z : sample) z = rng.normal();
  const double d = testutil::ks_one_sample(std::move(sample), testutil::normal_cdf);
  CHECK(d * std::sqrt(static_cast<double>(n)) < 2.0);
}

TEST_CASE("ziggurat and Box-Muller agree in distribution") {
  RngStream zig(31, 0);
  BoxMullerRef ref(77, 0);
  const int n = 1000000;
  std::vector<double> x(n), y(n);
  for (int i = 0; i < n; ++i) {
    x[i] = zig.normal();
    y[i] = ref.normal();
  }
  const double d = testutil::ks_two_sample(std::move(x), std::move(y));
  CHECK(d * std::sqrt(n / 2.0) < 2.0);
}

TEST_CASE("Neumaier summation keeps tiny terms") {
  NeumaierSum s;
  s.add(1e16);
  s.add(1.0);
  s.add(-1e16);
  CHECK(s.result() == 1.0);
}

TEST_CASE("mc_mean is exact on deterministic inputs") {
  const auto e = fptb::mc_mean(10001, [](std::uint64_t i) {
    return static_cast<double>(i);
  });
  CHECK(e.value == Catch::Approx(5000.0).epsilon(1e-14));
  CHECK(e.n_samples == 10001);
  const auto c = fptb::mc_mean(5000, [](std::uint64_t) { return 2.5; });
  CHECK(c.value == 2.5);
  CHECK(c.stderr_ == 0.0);
}

TEST_CASE("mc_mean is bitwise independent of the worker count") {
  const auto run = [] {
    return fptb::mc_mean(300000, [](std::uint64_t i) {
      RngStream rng(555, i);
      return std::exp(-rng.normal() * rng.normal());
    });
  };
  fptb::set_workers(1);
  const Estimate one = run();
  fptb::set_workers(4);
  const Estimate four = run();
  fptb::set_workers(3);
  const Estimate three = run();
  fptb::set_workers(0);
  CHECK(one.value == four.value);
  CHECK(one.stderr_ == four.stderr_);
  CHECK(one.value == three.value);
}

TEST_CASE("parallel blocks propagate exceptions") {
  fptb::set_workers(2);
  CHECK_THROWS_AS(fptb::parallel_blocks(64,
                                        [](std::uint64_t b) {
                                          if (b == 17) throw std::runtime_error("boom");
                                        }),
                  std::runtime_error);
  fptb::set_workers(0);
}

TEST_CASE("Gauss-Legendre rules are exact for polynomials") {
  const auto& rule = fptb::gauss_legendre(12);
  double wsum = 0.0;
  for (double w : rule.weights) wsum += w;
  CHECK(wsum == Catch::Approx(2.0).epsilon(1e-14));
  // degree 23 polynomial integrated exactly by 12 nodes
  const auto f = [](double x) { return 3.0 * std::pow(x, 23) + x * x * x * x; };
  const double got = fptb::gauss_integrate(f, -1.0, 1.0, 12);
  CHECK(got == Catch::Approx(2.0 / 5.0).margin(1e-13));
}

TEST_CASE("Gauss-Legendre matches adaptive Simpson on a smooth integrand") {
  const auto f = [](double x) { return std::exp(-x * x); };
  const double gl = fptb::gauss_integrate_panels(f, {0.0, 1.0, 3.0}, 32);
  const double as = testutil::adaptive_simpson(f, 0.0, 3.0, 1e-13);
  CHECK(gl == Catch::Approx(as).epsilon(1e-11));
}
