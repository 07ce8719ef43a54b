#pragma once

#include <functional>
#include <numbers>

#include "goafem/geometry.hpp"
#include "goafem/mesh.hpp"

namespace goafem {

inline constexpr double kZeta2 = std::numbers::pi * std::numbers::pi / 6.0;

/// Scalar function on the physical domain with a known way of integrating it
/// over a triangle. Cosine products are integrated in closed form.
class ScalarField {
 public:
  enum class Kind { constant, cosine_product, function };

  static ScalarField constant(double c);
  /// amplitude * cos(wx * x) * cos(wy * y)
  static ScalarField cosine_product(double amplitude, double wx, double wy);
  static ScalarField function(std::function<double(Point)> fn, int quad_order = 5);

  Kind kind() const { return kind_; }
  double operator()(Point p) const;
  /// Integral of the field over a triangle.
  double integrate(const Triangle& t) const;
  bool is_zero() const { return kind_ != Kind::function && value_ == 0.0; }

 private:
  Kind kind_ = Kind::constant;
  double value_ = 0.0;
  double wx_ = 0.0;
  double wy_ = 0.0;
  std::function<double(Point)> fn_;
  int quad_order_ = 5;
};

/// Closed-form integral of exp(i k . x) over a triangle, returned as
/// (real, imaginary). Stable for small |k| h via a divided-difference series.
std::pair<double, double> integrate_plane_wave(const Triangle& t, Point k);

struct ModeIndices {
  int k;
  int beta1;
  int beta2;
};

/// Total order k(m) and the two frequencies of the m-th Fourier mode.
ModeIndices mode_indices(int m);

/// Affine coefficient a(x, y) = 1 + sum_m y_m a_m(x) with
/// a_m(x) = A m^-2 cos(2 pi beta1(m) x1) cos(2 pi beta2(m) x2).
class CoefficientField {
 public:
  explicit CoefficientField(double amplitude = 0.9 / kZeta2);

  double amplitude() const { return amplitude_; }
  /// tau = A zeta(2); the parameter-free ellipticity margin.
  double tau() const { return amplitude_ * kZeta2; }
  double lambda() const { return 1.0 - tau(); }
  double Lambda() const { return 1.0 + tau(); }

  /// a_m(x), m >= 1.
  double eval_am(int m, Point x) const;
  ScalarField mode(int m) const;
  ScalarField mean() const { return ScalarField::constant(1.0); }

 private:
  double amplitude_;
};

enum class RhsKind { constant_one, directional_derivative, zero };

struct RhsSpec {
  RhsKind kind = RhsKind::constant_one;
  /// Region of the directional-derivative functional -int_R dv/dx1.
  Triangle region{};
};

/// Right-hand side of the experiment with the given setup id (1..4).
RhsSpec rhs_load_spec(int setup);

struct ProblemSpec {
  DomainSpec domain;
  int initial_triangles = 512;
  RhsSpec rhs;
  CoefficientField coefficient;
};

/// Domain, initial mesh size, load, and coefficient of setups 1..4.
ProblemSpec problem_for_setup(int setup);

}  // namespace goafem
