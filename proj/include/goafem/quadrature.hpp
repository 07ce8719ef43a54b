#pragma once

#include <vector>

#include "goafem/geometry.hpp"

namespace goafem {

struct QuadraturePoint {
  Point x;
  double weight;  // absolute weight (already scaled by the area)
};

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
  explicit GaussLegendre(int n);
};

/// Three edge-midpoint rule, exact for quadratics.
std::vector<QuadraturePoint> midpoint_rule(const Triangle& t);

/// Seven-point degree-5 rule.
std::vector<QuadraturePoint> degree5_rule(const Triangle& t);

/// Collapsed (Duffy) tensor Gauss rule with n x n points, exact for
/// polynomials of total degree 2n - 2.
std::vector<QuadraturePoint> collapsed_gauss_rule(const Triangle& t, int n);

/// Rule of at least the requested polynomial exactness.
std::vector<QuadraturePoint> triangle_rule(const Triangle& t, int order);

}  // namespace goafem
