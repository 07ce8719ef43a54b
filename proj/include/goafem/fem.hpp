#pragma once

#include <memory>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "goafem/mesh.hpp"
#include "goafem/problem.hpp"
#include "goafem/quadrature.hpp"

namespace goafem {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// P1 space on one mesh. By default Dirichlet vertices are eliminated; the
/// `all` policy keeps every vertex (used for checks with nonzero traces).
class FeSpace {
 public:
  enum class Dofs { interior, all };

  explicit FeSpace(MeshPtr mesh, Dofs policy = Dofs::interior);

  const Mesh& mesh() const { return *mesh_; }
  const MeshPtr& mesh_ptr() const { return mesh_; }
  int dim() const { return static_cast<int>(vertex_of_dof_.size()); }
  /// DOF of a mesh vertex, -1 if eliminated.
  int dof(int vertex) const { return dof_of_vertex_[vertex]; }
  int vertex(int dof) const { return vertex_of_dof_[dof]; }
  const std::array<int, 3>& element_dofs(int t) const { return element_dofs_[t]; }
  const P1Shape& shape(int t) const { return shapes_[t]; }

  /// Nodal coefficient vector over all mesh vertices (zeros on eliminated ones).
  Vector to_vertex_values(const Vector& x) const;
  Vector from_vertex_values(const Vector& v) const;

 private:
  MeshPtr mesh_;
  std::vector<int> dof_of_vertex_;
  std::vector<int> vertex_of_dof_;
  std::vector<std::array<int, 3>> element_dofs_;
  std::vector<P1Shape> shapes_;
};

using SpacePtr = std::shared_ptr<const FeSpace>;

/// Nonnegative weight w on the domain. Characteristic functions of convex
/// polygons are integrated exactly by clipping; the mollifier by subdivided
/// quadrature.
class Weight {
 public:
  enum class Kind { unit, polygon, mollifier };

  static Weight unit();
  /// scale * indicator of a convex counter-clockwise polygon.
  static Weight polygon(std::vector<Point> region, double scale = 1.0);
  /// Indicator divided by the polygon's area.
  static Weight normalized_polygon(std::vector<Point> region);
  /// C exp(-r^2 / (r^2 - |x - c|^2)) on the disk of radius r, with C
  /// normalizing the integral to one.
  static Weight mollifier(Point center, double radius);

  Kind kind() const { return kind_; }
  double operator()(Point p) const;
  double scale() const { return scale_; }
  const std::vector<Point>& region() const { return region_; }

  /// False only when the triangle certainly misses the support.
  bool may_intersect(const Triangle& t) const;
  /// Quadrature on t with weights multiplied by w; exact for quadratic
  /// polynomials unless the weight is the mollifier.
  void rule(const Triangle& t, std::vector<QuadraturePoint>& out) const;

 private:
  Kind kind_ = Kind::unit;
  double scale_ = 1.0;
  std::vector<Point> region_;
  Point lo_{}, hi_{};
  Point center_{};
  double radius_ = 0.0;
};

/// Normalizing constant of the mollifier of radius r.
double mollifier_constant(double radius);

/// int coeff grad(phi_i) . grad(phi_j) on one space.
SparseMatrix stiffness(const FeSpace& space, const ScalarField& coeff);

/// Rows from `row`, columns from `col`; both meshes from one NVB family.
SparseMatrix cross_stiffness(const FeSpace& row, const FeSpace& col, const ScalarField& coeff);

/// cross_stiffness(target, source, coeff) * x without forming the matrix.
Vector cross_apply(const FeSpace& target, const FeSpace& source, const ScalarField& coeff,
                   const Vector& x);

/// Diagonal of stiffness(space, 1).
Vector stiffness_diagonal(const FeSpace& space);

/// int w phi_i psi_j over the common refinement.
SparseMatrix weighted_mass(const FeSpace& row, const FeSpace& col, const Weight& w);
Vector weighted_mass_apply(const FeSpace& target, const FeSpace& source, const Weight& w,
                           const Vector& x);

/// int phi_i.
Vector load_constant_one(const FeSpace& space);
/// -int_R d(phi_i)/dx1 for a convex counter-clockwise polygon R.
Vector load_directional(const FeSpace& space, std::span<const Point> region);
/// int w phi_i.
Vector load_weight(const FeSpace& space, const Weight& w);
/// int w v for v with the given coefficients.
double functional_lw(const FeSpace& space, const Weight& w, const Vector& coeffs);

/// int w v (d . grad v).
double convection_value(const FeSpace& space, const Weight& w, Point d, const Vector& v);
/// int w [phi_i (d . grad u) + u (d . grad phi_i)], u from `source`.
Vector convection_load(const FeSpace& target, const FeSpace& source, const Weight& w, Point d,
                       const Vector& u);

}  // namespace goafem
