#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "cfmec/types.hpp"

namespace cfmec {

/// splitmix64 finalizer; used to mix seeds for independent streams.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives an isolated substream seed from the master seed. Streams are
/// keyed by (domain, index) so snapshot geometry, shadowing, channel
/// realizations and demands never share state.
inline std::uint64_t derive_stream(std::uint64_t master, std::uint64_t domain,
                                   std::uint64_t index) {
  return mix64(mix64(master ^ (domain * 0x9e3779b97f4a7c15ULL)) + index);
}

namespace stream {
inline constexpr std::uint64_t kUserDrop = 1;
inline constexpr std::uint64_t kShadowing = 2;
inline constexpr std::uint64_t kChannel = 3;
inline constexpr std::uint64_t kDemand = 4;
inline constexpr std::uint64_t kApCompute = 5;
inline constexpr std::uint64_t kPilotNoise = 6;
}  // namespace stream

/// Deterministic RNG. Normal variates use an explicit Box-Muller so the
/// byte stream depends only on mt19937_64, not on libstdc++ internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() {
    // 53-bit mantissa in [0,1)
    return (gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi], inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const double u = uniform();
    const auto span = static_cast<double>(hi - lo + 1);
    auto v = lo + static_cast<std::int64_t>(u * span);
    return v > hi ? hi : v;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

  /// Standard circularly-symmetric complex Gaussian, unit variance.
  Complex cnormal() {
    const double re = normal();
    const double im = normal();
    return {re * M_SQRT1_2, im * M_SQRT1_2};
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace cfmec
