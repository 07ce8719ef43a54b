#include "goafem/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace goafem {

GaussLegendre::GaussLegendre(int n) : nodes(n), weights(n) {
  if (n < 1) throw std::invalid_argument("Gauss-Legendre rule needs n >= 1");
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
}

namespace {

std::vector<QuadraturePoint> from_barycentric(const Triangle& t,
                                              std::initializer_list<std::array<double, 4>> pts) {
  const double area = std::abs(signed_area(t));
  std::vector<QuadraturePoint> out;
  out.reserve(pts.size());
  for (const auto& p : pts) {
    const Point x{p[0] * t[0].x + p[1] * t[1].x + p[2] * t[2].x,
                  p[0] * t[0].y + p[1] * t[1].y + p[2] * t[2].y};
    out.push_back({x, p[3] * area});
  }
  return out;
}

}  // namespace

std::vector<QuadraturePoint> midpoint_rule(const Triangle& t) {
  constexpr double third = 1.0 / 3.0;
  return from_barycentric(t, {{0.5, 0.5, 0.0, third}, {0.0, 0.5, 0.5, third}, {0.5, 0.0, 0.5, third}});
}

std::vector<QuadraturePoint> degree5_rule(const Triangle& t) {
  const double s15 = std::sqrt(15.0);
  const double a = (6.0 - s15) / 21.0;
  const double b = (6.0 + s15) / 21.0;
  const double wa = (155.0 - s15) / 1200.0;
  const double wb = (155.0 + s15) / 1200.0;
  const double c = 1.0 / 3.0;
  return from_barycentric(t, {{c, c, c, 0.225},
                              {a, a, 1.0 - 2.0 * a, wa},
                              {a, 1.0 - 2.0 * a, a, wa},
                              {1.0 - 2.0 * a, a, a, wa},
                              {b, b, 1.0 - 2.0 * b, wb},
                              {b, 1.0 - 2.0 * b, b, wb},
                              {1.0 - 2.0 * b, b, b, wb}});
}

std::vector<QuadraturePoint> collapsed_gauss_rule(const Triangle& t, int n) {
  const GaussLegendre gl(n);
  const double area2 = 2.0 * std::abs(signed_area(t));
  std::vector<QuadraturePoint> out;
  out.reserve(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    const double s = 0.5 * (gl.nodes[i] + 1.0);
    for (int j = 0; j < n; ++j) {
      const double r = 0.5 * (gl.nodes[j] + 1.0);
      // (s, r) in the unit square maps to (s, (1 - s) r) in the reference triangle.
      const double l1 = s;
      const double l2 = (1.0 - s) * r;
      const double l0 = 1.0 - l1 - l2;
      const Point x{l0 * t[0].x + l1 * t[1].x + l2 * t[2].x, l0 * t[0].y + l1 * t[1].y + l2 * t[2].y};
      const double w = 0.25 * gl.weights[i] * gl.weights[j] * (1.0 - s);
      out.push_back({x, w * area2});
    }
  }
  return out;
}

std::vector<QuadraturePoint> triangle_rule(const Triangle& t, int order) {
  if (order <= 2) return midpoint_rule(t);
  if (order <= 5) return degree5_rule(t);
  return collapsed_gauss_rule(t, (order + 3) / 2);
}

}  // namespace goafem
