#pragma once

#include <cmath>
#include <cstdint>

namespace hocl {

/// SplitMix64 generator (Steele, Lea, Flood 2014). Chosen because the whole
/// stream is reproducible from a single 64-bit seed with a handful of integer
/// operations, so any consumer can replay draws independently. The exact
/// update is documented in the README; tests rely on it.
///
/// Derived draws used across the project:
///   next()            -> raw 64-bit word
///   uniform01()       -> (next() >> 11) * 2^-53, in [0, 1)
///   index_below(n)    -> next() % n
///   normal()          -> Box-Muller from two uniform01() draws (first of the
///                        pair is returned, the second is discarded)
///   split()           -> child generator seeded with next()
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d9d049bb133111ULL;
    return z ^ (z >> 31);
  }

  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  std::uint64_t index_below(std::uint64_t n) { return next() % n; }

  double normal() {
    // Box-Muller; u1 nudged away from zero so log() stays finite.
    double u1 = uniform01();
    double u2 = uniform01();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  SplitMix64 split() { return SplitMix64(next()); }

 private:
  std::uint64_t state_;
};

}  // namespace hocl
