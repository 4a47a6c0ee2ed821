#pragma once

#include <cstdint>

namespace dpd {

// Deterministic 64-bit generator (splitmix64). Every random draw in the
// project flows through this type so that a run is reproducible bit for bit
// from its seed, independent of platform library differences.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53 mantissa bits.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // k-th derived stream: a fresh generator seeded with the (k+1)-th output of
  // a master generator running at `seed`. Consumers document which k they use
  // so distinct subsystems never share a stream.
  static SplitMix64 substream(std::uint64_t seed, std::uint64_t k) {
    SplitMix64 master(seed);
    std::uint64_t s = master.next();
    for (std::uint64_t i = 0; i < k; ++i) s = master.next();
    return SplitMix64(s);
  }

 private:
  std::uint64_t state_;
};

}  // namespace dpd
