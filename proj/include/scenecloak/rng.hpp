#pragma once

#include <cstdint>

namespace scenecloak {

/// SplitMix64. Used for every seeded draw so the sequences are reproducible
/// outside this library (the reference adapter regenerates the surrogate
/// weights from the same stream).
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform in [-scale, scale).
  double symmetric(double scale) { return (2.0 * uniform() - 1.0) * scale; }

private:
  std::uint64_t state_;
};

} // namespace scenecloak
