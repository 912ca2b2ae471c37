#ifndef CMFD_GEOMETRY_HPP
#define CMFD_GEOMETRY_HPP

#include <algorithm>
#include <compare>
#include <cstdint>
#include <cstdlib>

namespace cmfd {

struct Point {
  int row = 0;
  int col = 0;

  auto operator<=>(const Point&) const = default;
};

// Axis-aligned rectangle, inclusive origin, exclusive bottom/right.
struct Rect {
  int row = 0;
  int col = 0;
  int height = 0;
  int width = 0;

  int bottom() const { return row + height; }
  int right() const { return col + width; }
  std::int64_t area() const {
    return static_cast<std::int64_t>(height) * width;
  }
  bool contains(const Point& p) const {
    return p.row >= row && p.row < bottom() && p.col >= col && p.col < right();
  }
  auto operator<=>(const Rect&) const = default;
};

inline bool intersects(const Rect& a, const Rect& b) {
  return a.row < b.bottom() && b.row < a.bottom() && a.col < b.right() &&
         b.col < a.right();
}

inline int chebyshev_distance(const Point& a, const Point& b) {
  return std::max(std::abs(a.row - b.row), std::abs(a.col - b.col));
}

}  // namespace cmfd

#endif  // CMFD_GEOMETRY_HPP
