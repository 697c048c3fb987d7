#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace dualstream {

// Deterministic, platform-portable RNG. The std <random> distributions are
// implementation-defined, so every stochastic component (jitter, loss,
// degradation noise, test generators) draws through this instead.
struct SplitMix64 {
  uint64_t state = 0;

  explicit SplitMix64(uint64_t seed = 0) : state(seed) {}

  uint64_t next() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double u01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1]; safe as a log() argument.
  double u01_open() { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

  // Standard normal draw (Box-Muller, one of the pair).
  double gaussian() {
    const double u1 = u01_open();
    const double u2 = u01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
};

// Derives an independent stream from (seed, index) pairs, e.g. one stream
// per link or per frame.
inline uint64_t derive_seed(uint64_t seed, uint64_t index) {
  SplitMix64 mix(seed ^ (0x2545f4914f6cdd1dULL * (index + 1)));
  return mix.next();
}

}  // namespace dualstream
