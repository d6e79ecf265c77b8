#pragma once

#include <cmath>

namespace shotlgcp {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

inline bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

/// Axis-aligned rectangle. Court coordinates are in feet with the basket at
/// the origin; synthetic scenarios use the standardized square.
struct Region {
  double x_min = -25.0;
  double x_max = 25.0;
  double y_min = 0.0;
  double y_max = 35.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }

  bool contains(Point2 p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }

  void validate() const;

  /// Half court, x in [-25, 25] ft and y in [0, 35] ft.
  static Region court() { return Region{-25.0, 25.0, 0.0, 35.0}; }
  static Region standard_square() { return Region{-1.0, 1.0, -1.0, 1.0}; }

  friend bool operator==(const Region&, const Region&) = default;
};

} // namespace shotlgcp
