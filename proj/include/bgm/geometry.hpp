#pragma once

#include <cmath>
#include <limits>

namespace bgm {

/// A position in world meters.
struct TrajPoint {
  double x = 0.0;
  double y = 0.0;
};

inline TrajPoint operator+(TrajPoint a, TrajPoint b) { return {a.x + b.x, a.y + b.y}; }
inline TrajPoint operator-(TrajPoint a, TrajPoint b) { return {a.x - b.x, a.y - b.y}; }
inline TrajPoint operator*(double s, TrajPoint p) { return {s * p.x, s * p.y}; }

inline double dot(TrajPoint a, TrajPoint b) { return a.x * b.x + a.y * b.y; }
inline double norm(TrajPoint p) { return std::hypot(p.x, p.y); }
inline double dist(TrajPoint a, TrajPoint b) { return norm(a - b); }

inline bool finite(TrajPoint p) { return std::isfinite(p.x) && std::isfinite(p.y); }

/// Axis-aligned bounding box over world positions.
struct Bounds {
  TrajPoint min{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  TrajPoint max{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};

  void expand(TrajPoint p) {
    min.x = std::min(min.x, p.x);
    min.y = std::min(min.y, p.y);
    max.x = std::max(max.x, p.x);
    max.y = std::max(max.y, p.y);
  }
  bool contains(TrajPoint p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
  }
  bool empty() const { return !(min.x <= max.x); }
};

}  // namespace bgm
