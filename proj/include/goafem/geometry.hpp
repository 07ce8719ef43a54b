#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

namespace goafem {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
  friend bool operator==(const Point&, const Point&) = default;
};

inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }
inline Point midpoint(Point a, Point b) { return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)}; }

using Triangle = std::array<Point, 3>;

/// Signed area, positive for counter-clockwise vertex order.
inline double signed_area(const Triangle& t) {
  return 0.5 * cross(t[1] - t[0], t[2] - t[0]);
}

/// Affine P1 shape data of a nondegenerate triangle: gradients of the three
/// barycentric coordinates and the area.
struct P1Shape {
  double area = 0.0;
  std::array<Point, 3> grad{};
  Point origin{};

  explicit P1Shape(const Triangle& t);

  /// Barycentric coordinates of p with respect to the triangle.
  std::array<double, 3> barycentric(Point p) const;
};

/// Signed area of a simple polygon given in counter-clockwise order.
double polygon_area(std::span<const Point> poly);

/// Intersection of a convex polygon with a convex clip polygon (both
/// counter-clockwise), Sutherland-Hodgman. Returns an empty polygon when the
/// overlap has no interior.
std::vector<Point> clip_convex(std::span<const Point> subject, std::span<const Point> clip);

/// Fan triangulation of a convex polygon.
std::vector<Triangle> fan_triangulate(std::span<const Point> poly);

/// Smallest interior angle of a triangle, in radians.
double min_angle(const Triangle& t);

}  // namespace goafem
