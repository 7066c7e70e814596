#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace gridskg {

/// Planar point in projected meters.
struct Point {
  double x = 0;
  double y = 0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline bool is_finite(const Point& p) { return std::isfinite(p.x) && std::isfinite(p.y); }

inline double distance(const Point& a, const Point& b) { return std::hypot(b.x - a.x, b.y - a.y); }

inline double polyline_length(std::span<const Point> pts) {
  double len = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) len += distance(pts[i - 1], pts[i]);
  return len;
}

/// Point at arc length fraction `f` in [0,1] along the polyline.
inline Point point_along(std::span<const Point> pts, double f) {
  if (pts.empty()) return {};
  const double target = polyline_length(pts) * f;
  double walked = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double step = distance(pts[i - 1], pts[i]);
    if (step > 0 && walked + step >= target) {
      const double t = (target - walked) / step;
      return {pts[i - 1].x + t * (pts[i].x - pts[i - 1].x), pts[i - 1].y + t * (pts[i].y - pts[i - 1].y)};
    }
    walked += step;
  }
  return pts.back();
}

/// Closed ring; the closing vertex may be repeated or implied.
using Polygon = std::vector<Point>;

/// Even-odd ray casting. Points exactly on an edge follow the usual half-open
/// crossing rule, so they are inside for some edges and outside for others.
inline bool point_in_polygon(const Point& p, std::span<const Point> ring) {
  bool inside = false;
  const std::size_t n = ring.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point& a = ring[i];
    const Point& b = ring[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_at = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_at) inside = !inside;
    }
  }
  return inside;
}

}  // namespace gridskg
