#pragma once

#include <string>

#include "goafem/fem.hpp"
#include "goafem/mlspace.hpp"

namespace goafem {

enum class GoalKind { weighted_l2_sq, convection, second_moment, variance };

std::string to_string(GoalKind kind);

/// Quadratic goal functionals. With l(v) = int w v and orthonormality of
/// the Legendre basis:
///   weighted_l2_sq  g(u) = s sum_nu int w u_nu^2
///   convection      g(u) = s sum_nu int w u_nu (d1 + d2) u_nu
///   second_moment   g(u) = s sum_nu l(u_nu)^2
///   variance        g(u) = s sum_{nu != 0} l(u_nu)^2
class GoalFunctional {
 public:
  GoalFunctional(GoalKind kind, Weight weight, double scale = 1.0);

  /// Goal of the experiment with the given setup id (1..4).
  static GoalFunctional for_setup(int setup);

  GoalKind kind() const { return kind_; }
  const Weight& weight() const { return weight_; }
  double scale() const { return scale_; }

  double value(const MultilevelStructure& s, const MlFunction& u) const;

  /// <g'(w), phi_i P_nu> for the basis of `target`, which may belong to an
  /// index outside the structure of w.
  Vector derivative_block(const MultilevelStructure& s, const MlFunction& w, const MultiIndex& nu,
                          const FeSpace& target) const;

  /// <g'(w), .> on the blocks of the structure of w.
  MlFunction derivative_load(const MultilevelStructure& s, const MlFunction& w) const;

 private:
  GoalKind kind_;
  Weight weight_;
  double scale_;
};

/// Normalized bump of radius r centered at x0.
Weight mollifier_weight(Point x0, double r);

}  // namespace goafem
