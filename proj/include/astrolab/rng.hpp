#pragma once

#include <cstdint>
#include <random>

namespace astrolab {

/// Deterministic noise source. mt19937_64 has standard-mandated output,
/// and the uniform mapping below avoids distribution objects whose
/// sequences vary between standard library implementations.
class NoiseRng {
 public:
  explicit NoiseRng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double unit() { return (engine_() >> 11) * 0x1.0p-53; }

  /// Zero-mean uniform in [-amplitude, +amplitude].
  double centered(double amplitude) {
    return amplitude * (2.0 * unit() - 1.0);
  }

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace astrolab
