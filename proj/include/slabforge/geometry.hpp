#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace slabforge {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
constexpr Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
constexpr Vec2 operator*(Vec2 v, double s) { return {s * v.x, s * v.y}; }
constexpr bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline double dist(Vec2 a, Vec2 b) { return norm(b - a); }

/// Signed area of triangle (a, b, c); positive for counterclockwise vertices.
constexpr double triangle_signed_area(Vec2 a, Vec2 b, Vec2 c) {
  return 0.5 * cross(b - a, c - a);
}

/// Rotate p about center by dtheta radians (counterclockwise positive).
inline Vec2 rotate_about(Vec2 center, double dtheta, Vec2 p) {
  const double c = std::cos(dtheta);
  const double s = std::sin(dtheta);
  const Vec2 r = p - center;
  return {center.x + c * r.x - s * r.y, center.y + s * r.x + c * r.y};
}

/// Radius of the inscribed circle; 0 for degenerate triangles.
inline double triangle_inradius(Vec2 a, Vec2 b, Vec2 c) {
  const double la = dist(b, c), lb = dist(c, a), lc = dist(a, b);
  const double s = 0.5 * (la + lb + lc);
  if (s <= 0.0) return 0.0;
  return std::abs(triangle_signed_area(a, b, c)) / s;
}

/// Radius of the circumscribed circle; +inf for degenerate triangles.
inline double triangle_circumradius(Vec2 a, Vec2 b, Vec2 c) {
  const double la = dist(b, c), lb = dist(c, a), lc = dist(a, b);
  const double area = std::abs(triangle_signed_area(a, b, c));
  if (area == 0.0) return std::numeric_limits<double>::infinity();
  return la * lb * lc / (4.0 * area);
}

/// Shape quality r_in / r_circ in (0, 0.5]; 0.5 for equilateral triangles.
inline double inradius_circumradius_ratio(Vec2 a, Vec2 b, Vec2 c) {
  const double rc = triangle_circumradius(a, b, c);
  if (!std::isfinite(rc) || rc == 0.0) return 0.0;
  return triangle_inradius(a, b, c) / rc;
}

/// Distance between points at polar (r1, phi) and (r2, phi + dphi) about a
/// shared center (law of cosines).
inline double radial_chord(double r1, double r2, double dphi) {
  return std::sqrt(r1 * r1 + r2 * r2 - 2.0 * r1 * r2 * std::cos(dphi));
}

/// Axis-aligned rectangle given by its two extreme corners.
struct Box {
  Vec2 lo;
  Vec2 hi;

  bool well_formed() const { return lo.x < hi.x && lo.y < hi.y; }
  Vec2 center() const { return {0.5 * (lo.x + hi.x), 0.5 * (lo.y + hi.y)}; }
  Vec2 half_widths() const { return {0.5 * (hi.x - lo.x), 0.5 * (hi.y - lo.y)}; }
  bool contains(Vec2 p) const {
    return lo.x <= p.x && p.x <= hi.x && lo.y <= p.y && p.y <= hi.y;
  }
};

/// i modulo n mapped into [0, n) for possibly negative i.
constexpr std::int64_t wrap_index(std::int64_t i, std::int64_t n) {
  const std::int64_t m = i % n;
  return m < 0 ? m + n : m;
}

}  // namespace slabforge
