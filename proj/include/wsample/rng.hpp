#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "wsample/types.hpp"

namespace wsample {

/// The one generator used for every random draw in the library. Seeded explicitly
/// and passed by reference; there is no global instance.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits. Spelled out instead of
  /// std::uniform_real_distribution so draws are identical across standard libraries.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer on [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = engine_.max() - engine_.max() % bound;
    std::uint64_t r;
    do {
      r = engine_();
    } while (r >= limit);
    return r % bound;
  }

  /// exp(i theta) with theta uniform on [0, 2 pi).
  Complex unit_circle() {
    const double theta = 2.0 * std::numbers::pi * uniform();
    return {std::cos(theta), std::sin(theta)};
  }

 private:
  std::mt19937_64 engine_;
};

/// Independent sub-seed for stream `stream` of a run seeded with `seed` (splitmix64).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + (stream + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// `count` unit-modulus complex numbers from a fresh generator seeded with `seed`.
ComplexVector random_unit_circle(Eigen::Index count, std::uint64_t seed);

/// Same, continuing an existing stream.
ComplexVector random_unit_circle(Eigen::Index count, Rng& rng);

}  // namespace wsample
