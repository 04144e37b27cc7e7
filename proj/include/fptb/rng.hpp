#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace fptb {

// Counter-based generator in the Philox4x32-10 family.  A block is a pure
// function of (key, stream, counter), so any path/stream can be generated
// independently of all others and of the worker that runs it.
namespace detail {

struct PhiloxBlock {
  std::uint64_t a;
  std::uint64_t b;
};

inline PhiloxBlock philox4x32(std::uint64_t key, std::uint64_t stream,
                              std::uint64_t counter) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  std::uint32_t c0 = static_cast<std::uint32_t>(counter);
  std::uint32_t c1 = static_cast<std::uint32_t>(counter >> 32);
  std::uint32_t c2 = static_cast<std::uint32_t>(stream);
  std::uint32_t c3 = static_cast<std::uint32_t>(stream >> 32);
  std::uint32_t k0 = static_cast<std::uint32_t>(key);
  std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);

  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c0;
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c2;
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    c0 = hi1 ^ c1 ^ k0;
    c1 = lo1;
    c2 = hi0 ^ c3 ^ k1;
    c3 = lo0;
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  return PhiloxBlock{(static_cast<std::uint64_t>(c1) << 32) | c0,
                     (static_cast<std::uint64_t>(c3) << 32) | c2};
}

// Ziggurat tables for the standard normal, 256 layers.
struct ZigguratTables {
  // Layer edge abscissa and the area of one layer; published constants for
  // the 256-layer decomposition of exp(-x^2/2).
  static constexpr double kR = 3.6541528853610088;
  static constexpr double kV = 4.928673233974658e-3;

  std::array<double, 256> x;   // x[i]: right edge of layer i, x[0] = tail edge
  std::array<double, 256> f;   // f[i] = exp(-x[i]^2/2)
  std::array<std::uint64_t, 256> k;  // integer acceptance thresholds

  ZigguratTables() {
    constexpr double kM = 9007199254740992.0;  // 2^53
    double d = kR;
    double t = kR;
    const double q = kV / std::exp(-0.5 * kR * kR);
    k[0] = static_cast<std::uint64_t>((d / q) * kM);
    k[1] = 0;
    x[0] = q / kM;
    x[255] = d / kM;
    f[0] = 1.0;
    f[255] = std::exp(-0.5 * d * d);
    for (int i = 254; i >= 1; --i) {
      d = std::sqrt(-2.0 * std::log(kV / d + std::exp(-0.5 * d * d)));
      k[i + 1] = static_cast<std::uint64_t>((d / t) * kM);
      t = d;
      f[i] = std::exp(-0.5 * d * d);
      x[i] = d / kM;
    }
    // x[] now stores widths scaled by 2^-53 so that j * x[i] is the abscissa.
  }
};

inline const ZigguratTables& ziggurat() {
  static const ZigguratTables tables;
  return tables;
}

}  // namespace detail

// One independent random stream, addressed by (seed, stream id).  Uniforms
// and normals are consumed sequentially within the stream; streams with
// different ids never overlap regardless of how much either consumes.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : key_(seed), stream_(stream_id) {}

  std::uint64_t next_u64() {
    if (!have_spare_) {
      const auto block = detail::philox4x32(key_, stream_, counter_++);
      spare_ = block.b;
      have_spare_ = true;
      return block.a;
    }
    have_spare_ = false;
    return spare_;
  }

  // Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
  }

  // Standard normal via the 256-layer ziggurat; exact tail handling.
  double normal() {
    const auto& z = detail::ziggurat();
    for (;;) {
      const std::uint64_t u = next_u64();
      const int i = static_cast<int>(u & 0xFF);
      const bool negative = (u >> 8) & 1u;
      const std::uint64_t j = u >> 11;  // 53 significant bits
      const double mag = static_cast<double>(j);
      if (j < z.k[i]) {
        const double r = mag * z.x[i];
        return negative ? -r : r;
      }
      if (i == 0) {
        // Tail beyond kR: exact exponential-rejection sampler.
        double xx;
        double yy;
        do {
          xx = -std::log(uniform()) / detail::ZigguratTables::kR;
          yy = -std::log(uniform());
        } while (yy + yy < xx * xx);
        const double r = detail::ZigguratTables::kR + xx;
        return negative ? -r : r;
      }
      const double r = mag * z.x[i];
      if (z.f[i] + uniform() * (z.f[i - 1] - z.f[i]) < std::exp(-0.5 * r * r)) {
        return negative ? -r : r;
      }
    }
  }

 private:
  std::uint64_t key_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::uint64_t spare_ = 0;
  bool have_spare_ = false;
};

}  // namespace fptb
