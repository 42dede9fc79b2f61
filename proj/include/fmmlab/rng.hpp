#pragma once

#include <cstdint>

namespace fmmlab {

// Counter-based deterministic generator. The draw at (seed, counter) is
//
//   bits(seed, counter) = mix64(seed + 0x9E3779B97F4A7C15 * (counter + 1))
//
// where mix64 is the SplitMix64 finalizer. Identical (seed, counter) give
// identical draws on every platform; derived streams use child_seed below.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t counter = 0;

  static std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  static std::uint64_t bits(std::uint64_t seed, std::uint64_t counter) {
    return mix64(seed + 0x9E3779B97F4A7C15ull * (counter + 1));
  }

  std::uint64_t next_bits() { return bits(seed, counter++); }

  bool next_bool() { return (next_bits() & 1u) != 0; }

  // Run index -> independent seed, for multi-run ensembles.
  static std::uint64_t child_seed(std::uint64_t seed, std::uint64_t index) {
    return bits(seed ^ 0x5EEDC0DE5EEDC0DEull, index);
  }

  // Uniform in [lo, hi].
  double next_uniform(double lo, double hi) {
    double u = static_cast<double>(next_bits() >> 11) * 0x1p-53;
    return lo + (hi - lo) * u;
  }
};

}  // namespace fmmlab
