#pragma once

#include <cstdint>

namespace astrolab {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Squared Euclidean distance in RGB space; exact in integers.
inline long long color_dist2(const Rgb& a, const Rgb& b) {
  const long long dr = static_cast<long long>(a.r) - b.r;
  const long long dg = static_cast<long long>(a.g) - b.g;
  const long long db = static_cast<long long>(a.b) - b.b;
  return dr * dr + dg * dg + db * db;
}

}  // namespace astrolab
