#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace riccati::detail {

/// splitmix64 finalizer; used to derive well-separated per-trial seeds so
/// trials can run on any worker and still reproduce bit-for-bit.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Uniform double in [0, 1) from the top 53 bits of the generator.
inline double uniform_draw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Exponential(rate) by inverse CDF; avoids the implementation-defined
/// std::exponential_distribution so streams are stable across toolchains.
inline double exponential_draw(std::mt19937_64& rng, double rate) {
  return -std::log1p(-uniform_draw(rng)) / rate;
}

}  // namespace riccati::detail
