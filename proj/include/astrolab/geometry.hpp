#pragma once

namespace astrolab {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

/// Axis-aligned rectangle; corners are normalized so x0 <= x1, y0 <= y1.
struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  friend bool operator==(const Rect&, const Rect&) = default;

  bool contains(Vec2 p) const {
    return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
  }

  bool contains(const Rect& r) const {
    return r.x0 >= x0 && r.x1 <= x1 && r.y0 >= y0 && r.y1 <= y1;
  }

  // Shared edges do not count as overlap; only positive-area intersection.
  bool overlaps(const Rect& r) const {
    const double ix0 = x0 > r.x0 ? x0 : r.x0;
    const double iy0 = y0 > r.y0 ? y0 : r.y0;
    const double ix1 = x1 < r.x1 ? x1 : r.x1;
    const double iy1 = y1 < r.y1 ? y1 : r.y1;
    return ix0 < ix1 && iy0 < iy1;
  }
};

}  // namespace astrolab
