#include "goafem/geometry.hpp"

#include <algorithm>
#include <numbers>
#include <stdexcept>

namespace goafem {

P1Shape::P1Shape(const Triangle& t) : origin(t[0]) {
  const Point e1 = t[1] - t[0];
  const Point e2 = t[2] - t[0];
  const double det = cross(e1, e2);
  if (!(std::abs(det) > 0.0)) {
    throw std::domain_error("degenerate triangle");
  }
  area = 0.5 * std::abs(det);
  // Rows of the inverse Jacobian give the gradients of lambda_1, lambda_2.
  grad[1] = {e2.y / det, -e2.x / det};
  grad[2] = {-e1.y / det, e1.x / det};
  grad[0] = {-grad[1].x - grad[2].x, -grad[1].y - grad[2].y};
}

std::array<double, 3> P1Shape::barycentric(Point p) const {
  const Point d = p - origin;
  const double l1 = dot(grad[1], d);
  const double l2 = dot(grad[2], d);
  return {1.0 - l1 - l2, l1, l2};
}

double polygon_area(std::span<const Point> poly) {
  double a = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    a += cross(poly[i], poly[(i + 1) % n]);
  }
  return 0.5 * a;
}

std::vector<Point> clip_convex(std::span<const Point> subject, std::span<const Point> clip) {
  std::vector<Point> out(subject.begin(), subject.end());
  const std::size_t nc = clip.size();
  for (std::size_t e = 0; e < nc && !out.empty(); ++e) {
    const Point a = clip[e];
    const Point b = clip[(e + 1) % nc];
    const Point dir = b - a;
    const double scale = norm(dir);
    auto side = [&](Point p) { return cross(dir, p - a) / scale; };
    std::vector<Point> in;
    in.reserve(out.size() + 2);
    const std::size_t n = out.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point p = out[i];
      const Point q = out[(i + 1) % n];
      const double sp = side(p);
      const double sq = side(q);
      if (sp >= 0.0) in.push_back(p);
      if ((sp > 0.0 && sq < 0.0) || (sp < 0.0 && sq > 0.0)) {
        const double t = sp / (sp - sq);
        in.push_back(p + t * (q - p));
      }
    }
    out = std::move(in);
  }
  if (out.size() < 3 || polygon_area(out) <= 0.0) return {};
  return out;
}

std::vector<Triangle> fan_triangulate(std::span<const Point> poly) {
  std::vector<Triangle> tris;
  if (poly.size() < 3) return tris;
  tris.reserve(poly.size() - 2);
  for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
    Triangle t{poly[0], poly[i], poly[i + 1]};
    if (signed_area(t) > 0.0) tris.push_back(t);
  }
  return tris;
}

double min_angle(const Triangle& t) {
  double best = std::numbers::pi;
  for (int k = 0; k < 3; ++k) {
    const Point u = t[(k + 1) % 3] - t[k];
    const Point v = t[(k + 2) % 3] - t[k];
    const double c = std::clamp(dot(u, v) / (norm(u) * norm(v)), -1.0, 1.0);
    best = std::min(best, std::acos(c));
  }
  return best;
}

}  // namespace goafem
