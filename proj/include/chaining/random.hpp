#pragma once

#include <cstdint>
#include <random>

namespace chaining {

// std::mt19937_64 output is fixed by the standard; the distributions in
// <random> are not, so bounded draws are done here to keep streams portable.
using Rng = std::mt19937_64;

/// Uniform integer in [0, bound) by rejection; bound must be nonzero.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::uint64_t(0) - (std::uint64_t(0) - bound) % bound;
  for (;;) {
    const std::uint64_t x = rng();
    if (limit == 0 || x < limit) return x % bound;
  }
}

/// Uniform double in [0, 1).
inline double uniform_unit(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform_real(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform_unit(rng); }

/// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) { return mix64(mix64(a) ^ (b + 0x632be59bd9b4e019ull)); }

}  // namespace chaining
