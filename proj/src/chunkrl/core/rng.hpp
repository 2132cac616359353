#pragma once

#include <cmath>
#include <cstdint>

namespace chunkrl {

// Deterministic counter-free PRNG (xoshiro-style splitmix64 core).
// std::uniform_*_distribution is implementation-defined, so all draws the
// engine depends on for reproducibility go through this class instead.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {
    // Decorrelate trivially-related seeds (0, 1, 2, ...).
    next_u64();
    next_u64();
  }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) {
    // Modulo bias is negligible for the small n used here (grids, vocabs).
    return next_u64() % n;
  }

  // Standard normal via Box-Muller; one value per call, cached pair dropped
  // to keep the stream position independent of call parity.
  double next_normal() {
    double u1 = next_double();
    double u2 = next_double();
    while (u1 <= 0.0)
      u1 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

private:
  std::uint64_t state_;
};

// Stable hash combiner for deriving independent per-entity seeds.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

} // namespace chunkrl
