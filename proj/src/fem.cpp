#include "goafem/fem.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace goafem {

FeSpace::FeSpace(MeshPtr mesh, Dofs policy) : mesh_(std::move(mesh)) {
  const Mesh& m = *mesh_;
  dof_of_vertex_.assign(m.num_vertices(), -1);
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (policy == Dofs::all || !m.boundary()[v]) {
      dof_of_vertex_[v] = static_cast<int>(vertex_of_dof_.size());
      vertex_of_dof_.push_back(v);
    }
  }
  element_dofs_.resize(m.num_triangles());
  shapes_.reserve(m.num_triangles());
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles()[t];
    for (int k = 0; k < 3; ++k) element_dofs_[t][k] = dof_of_vertex_[tri[k]];
    shapes_.emplace_back(m.triangle(t));
  }
}

Vector FeSpace::to_vertex_values(const Vector& x) const {
  Vector v = Vector::Zero(mesh_->num_vertices());
  for (int d = 0; d < dim(); ++d) v[vertex_of_dof_[d]] = x[d];
  return v;
}

Vector FeSpace::from_vertex_values(const Vector& v) const {
  Vector x(dim());
  for (int d = 0; d < dim(); ++d) x[d] = v[vertex_of_dof_[d]];
  return x;
}

namespace {

bool same_mesh(const FeSpace& a, const FeSpace& b) {
  if (a.mesh_ptr() == b.mesh_ptr()) return true;
  return a.mesh().hash() == b.mesh().hash() && a.mesh() == b.mesh();
}

// Calls fn(K, la, lb) on every cell K of the common refinement.
template <class Fn>
void for_each_cell(const FeSpace& a, const FeSpace& b, Fn&& fn) {
  if (same_mesh(a, b)) {
    for (int t = 0; t < a.mesh().num_triangles(); ++t) fn(a.mesh().triangle(t), t, t);
    return;
  }
  const Forest& forest = a.mesh().forest();
  for_each_overlay_cell(a.mesh(), b.mesh(), [&](int node, int la, int lb) {
    fn(forest.triangle(node), la, lb);
  });
}

double bump_integral() {
  // int_0^1 exp(-1 / (1 - s)) ds, split to resolve the flat end.
  const GaussLegendre gl(40);
  double sum = 0.0;
  for (double lo : {0.0, 0.5}) {
    for (int i = 0; i < 40; ++i) {
      const double s = lo + 0.25 * (gl.nodes[i] + 1.0);
      sum += 0.25 * gl.weights[i] * std::exp(-1.0 / (1.0 - s));
    }
  }
  return sum;
}

bool point_in_convex(Point p, const std::vector<Point>& poly) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (cross(poly[(i + 1) % n] - poly[i], p - poly[i]) < 0.0) return false;
  }
  return true;
}

void append_scaled(const std::vector<QuadraturePoint>& pts, double s,
                   std::vector<QuadraturePoint>& out) {
  for (const auto& q : pts) out.push_back({q.x, s * q.weight});
}

}  // namespace

double mollifier_constant(double radius) {
  return 1.0 / (std::numbers::pi * radius * radius * bump_integral());
}

Weight Weight::unit() { return Weight{}; }

Weight Weight::polygon(std::vector<Point> region, double scale) {
  if (region.size() < 3 || polygon_area(region) <= 0.0) {
    throw PreconditionError("weight region must be a counter-clockwise polygon");
  }
  Weight w;
  w.kind_ = Kind::polygon;
  w.scale_ = scale;
  w.lo_ = w.hi_ = region.front();
  for (const Point& p : region) {
    w.lo_ = {std::min(w.lo_.x, p.x), std::min(w.lo_.y, p.y)};
    w.hi_ = {std::max(w.hi_.x, p.x), std::max(w.hi_.y, p.y)};
  }
  w.region_ = std::move(region);
  return w;
}

Weight Weight::normalized_polygon(std::vector<Point> region) {
  const double a = polygon_area(region);
  return polygon(std::move(region), a > 0.0 ? 1.0 / a : 1.0);
}

Weight Weight::mollifier(Point center, double radius) {
  if (!(radius > 0.0)) throw PreconditionError("mollifier radius must be positive");
  Weight w;
  w.kind_ = Kind::mollifier;
  w.center_ = center;
  w.radius_ = radius;
  w.scale_ = mollifier_constant(radius);
  w.lo_ = {center.x - radius, center.y - radius};
  w.hi_ = {center.x + radius, center.y + radius};
  return w;
}

double Weight::operator()(Point p) const {
  switch (kind_) {
    case Kind::unit: return 1.0;
    case Kind::polygon: return point_in_convex(p, region_) ? scale_ : 0.0;
    case Kind::mollifier: {
      const Point d = p - center_;
      const double r2 = radius_ * radius_;
      const double rho2 = dot(d, d);
      if (rho2 >= r2) return 0.0;
      return scale_ * std::exp(-r2 / (r2 - rho2));
    }
  }
  return 0.0;
}

bool Weight::may_intersect(const Triangle& t) const {
  if (kind_ == Kind::unit) return true;
  const double x0 = std::min({t[0].x, t[1].x, t[2].x});
  const double x1 = std::max({t[0].x, t[1].x, t[2].x});
  const double y0 = std::min({t[0].y, t[1].y, t[2].y});
  const double y1 = std::max({t[0].y, t[1].y, t[2].y});
  return x1 > lo_.x && x0 < hi_.x && y1 > lo_.y && y0 < hi_.y;
}

void Weight::rule(const Triangle& t, std::vector<QuadraturePoint>& out) const {
  switch (kind_) {
    case Kind::unit: append_scaled(midpoint_rule(t), 1.0, out); return;
    case Kind::polygon: {
      if (!may_intersect(t)) return;
      if (point_in_convex(t[0], region_) && point_in_convex(t[1], region_) &&
          point_in_convex(t[2], region_)) {
        append_scaled(midpoint_rule(t), scale_, out);
        return;
      }
      const auto piece = clip_convex(std::span<const Point>(t.data(), 3), region_);
      for (const auto& sub : fan_triangulate(piece)) append_scaled(midpoint_rule(sub), scale_, out);
      return;
    }
    case Kind::mollifier: {
      // Subdivide until cells resolve the bump, skipping cells off the disk.
      const double hmax = radius_ / 16.0;
      std::vector<Triangle> stack{t};
      while (!stack.empty()) {
        const Triangle k = stack.back();
        stack.pop_back();
        if (!may_intersect(k)) continue;
        const double diam =
            std::max({norm(k[1] - k[0]), norm(k[2] - k[1]), norm(k[0] - k[2])});
        if (diam > hmax) {
          const Point m01 = midpoint(k[0], k[1]);
          const Point m12 = midpoint(k[1], k[2]);
          const Point m20 = midpoint(k[2], k[0]);
          stack.push_back({k[0], m01, m20});
          stack.push_back({m01, k[1], m12});
          stack.push_back({m20, m12, k[2]});
          stack.push_back({m12, m20, m01});
          continue;
        }
        for (const auto& q : degree5_rule(k)) {
          const double w = (*this)(q.x);
          if (w != 0.0) out.push_back({q.x, w * q.weight});
        }
      }
      return;
    }
  }
}

SparseMatrix stiffness(const FeSpace& space, const ScalarField& coeff) {
  return cross_stiffness(space, space, coeff);
}

SparseMatrix cross_stiffness(const FeSpace& row, const FeSpace& col, const ScalarField& coeff) {
  std::vector<Eigen::Triplet<double>> trips;
  if (!coeff.is_zero()) {
    for_each_cell(row, col, [&](const Triangle& k, int la, int lb) {
      const double c = coeff.integrate(k);
      if (c == 0.0) return;
      const auto& ga = row.shape(la).grad;
      const auto& gb = col.shape(lb).grad;
      const auto& da = row.element_dofs(la);
      const auto& db = col.element_dofs(lb);
      for (int i = 0; i < 3; ++i) {
        if (da[i] < 0) continue;
        for (int j = 0; j < 3; ++j) {
          if (db[j] < 0) continue;
          trips.emplace_back(da[i], db[j], c * dot(ga[i], gb[j]));
        }
      }
    });
  }
  SparseMatrix m(row.dim(), col.dim());
  m.setFromTriplets(trips.begin(), trips.end());
  m.prune(0.0);
  return m;
}

Vector cross_apply(const FeSpace& target, const FeSpace& source, const ScalarField& coeff,
                   const Vector& x) {
  Vector y = Vector::Zero(target.dim());
  if (coeff.is_zero()) return y;
  for_each_cell(target, source, [&](const Triangle& k, int lt, int ls) {
    const auto& ds = source.element_dofs(ls);
    const auto& gs = source.shape(ls).grad;
    Point g{};
    for (int j = 0; j < 3; ++j) {
      if (ds[j] >= 0) g = g + x[ds[j]] * gs[j];
    }
    if (g.x == 0.0 && g.y == 0.0) return;
    const double c = coeff.integrate(k);
    const auto& dt = target.element_dofs(lt);
    const auto& gt = target.shape(lt).grad;
    for (int i = 0; i < 3; ++i) {
      if (dt[i] >= 0) y[dt[i]] += c * dot(gt[i], g);
    }
  });
  return y;
}

Vector stiffness_diagonal(const FeSpace& space) {
  Vector d = Vector::Zero(space.dim());
  for (int t = 0; t < space.mesh().num_triangles(); ++t) {
    const auto& s = space.shape(t);
    const auto& dofs = space.element_dofs(t);
    for (int i = 0; i < 3; ++i) {
      if (dofs[i] >= 0) d[dofs[i]] += s.area * dot(s.grad[i], s.grad[i]);
    }
  }
  return d;
}

SparseMatrix weighted_mass(const FeSpace& row, const FeSpace& col, const Weight& w) {
  std::vector<Eigen::Triplet<double>> trips;
  std::vector<QuadraturePoint> qp;
  for_each_cell(row, col, [&](const Triangle& k, int la, int lb) {
    if (!w.may_intersect(k)) return;
    qp.clear();
    w.rule(k, qp);
    if (qp.empty()) return;
    double local[3][3] = {};
    for (const auto& q : qp) {
      const auto a = row.shape(la).barycentric(q.x);
      const auto b = col.shape(lb).barycentric(q.x);
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) local[i][j] += q.weight * a[i] * b[j];
      }
    }
    const auto& da = row.element_dofs(la);
    const auto& db = col.element_dofs(lb);
    for (int i = 0; i < 3; ++i) {
      if (da[i] < 0) continue;
      for (int j = 0; j < 3; ++j) {
        if (db[j] >= 0) trips.emplace_back(da[i], db[j], local[i][j]);
      }
    }
  });
  SparseMatrix m(row.dim(), col.dim());
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

Vector weighted_mass_apply(const FeSpace& target, const FeSpace& source, const Weight& w,
                           const Vector& x) {
  Vector y = Vector::Zero(target.dim());
  std::vector<QuadraturePoint> qp;
  for_each_cell(target, source, [&](const Triangle& k, int lt, int ls) {
    if (!w.may_intersect(k)) return;
    const auto& ds = source.element_dofs(ls);
    double xs[3];
    bool any = false;
    for (int j = 0; j < 3; ++j) {
      xs[j] = ds[j] >= 0 ? x[ds[j]] : 0.0;
      any = any || xs[j] != 0.0;
    }
    if (!any) return;
    qp.clear();
    w.rule(k, qp);
    const auto& dt = target.element_dofs(lt);
    for (const auto& q : qp) {
      const auto a = target.shape(lt).barycentric(q.x);
      const auto b = source.shape(ls).barycentric(q.x);
      const double u = b[0] * xs[0] + b[1] * xs[1] + b[2] * xs[2];
      for (int i = 0; i < 3; ++i) {
        if (dt[i] >= 0) y[dt[i]] += q.weight * a[i] * u;
      }
    }
  });
  return y;
}

Vector load_constant_one(const FeSpace& space) {
  Vector y = Vector::Zero(space.dim());
  for (int t = 0; t < space.mesh().num_triangles(); ++t) {
    const double share = space.shape(t).area / 3.0;
    for (int d : space.element_dofs(t)) {
      if (d >= 0) y[d] += share;
    }
  }
  return y;
}

Vector load_directional(const FeSpace& space, std::span<const Point> region) {
  Vector y = Vector::Zero(space.dim());
  for (int t = 0; t < space.mesh().num_triangles(); ++t) {
    const Triangle tri = space.mesh().triangle(t);
    const auto piece = clip_convex(std::span<const Point>(tri.data(), 3), region);
    if (piece.empty()) continue;
    const double a = polygon_area(piece);
    const auto& dofs = space.element_dofs(t);
    for (int i = 0; i < 3; ++i) {
      if (dofs[i] >= 0) y[dofs[i]] -= space.shape(t).grad[i].x * a;
    }
  }
  return y;
}

Vector load_weight(const FeSpace& space, const Weight& w) {
  Vector y = Vector::Zero(space.dim());
  std::vector<QuadraturePoint> qp;
  for (int t = 0; t < space.mesh().num_triangles(); ++t) {
    const Triangle tri = space.mesh().triangle(t);
    if (!w.may_intersect(tri)) continue;
    qp.clear();
    w.rule(tri, qp);
    const auto& dofs = space.element_dofs(t);
    for (const auto& q : qp) {
      const auto l = space.shape(t).barycentric(q.x);
      for (int i = 0; i < 3; ++i) {
        if (dofs[i] >= 0) y[dofs[i]] += q.weight * l[i];
      }
    }
  }
  return y;
}

double functional_lw(const FeSpace& space, const Weight& w, const Vector& coeffs) {
  if (coeffs.size() != space.dim()) throw PreconditionError("coefficient vector has wrong size");
  return load_weight(space, w).dot(coeffs);
}

double convection_value(const FeSpace& space, const Weight& w, Point d, const Vector& v) {
  if (v.size() != space.dim()) throw PreconditionError("coefficient vector has wrong size");
  double sum = 0.0;
  std::vector<QuadraturePoint> qp;
  for (int t = 0; t < space.mesh().num_triangles(); ++t) {
    const Triangle tri = space.mesh().triangle(t);
    if (!w.may_intersect(tri)) continue;
    const auto& dofs = space.element_dofs(t);
    const auto& s = space.shape(t);
    double x[3];
    Point g{};
    for (int j = 0; j < 3; ++j) {
      x[j] = dofs[j] >= 0 ? v[dofs[j]] : 0.0;
      g = g + x[j] * s.grad[j];
    }
    const double dg = dot(d, g);
    if (dg == 0.0) continue;
    qp.clear();
    w.rule(tri, qp);
    double wv = 0.0;
    for (const auto& q : qp) {
      const auto l = s.barycentric(q.x);
      wv += q.weight * (l[0] * x[0] + l[1] * x[1] + l[2] * x[2]);
    }
    sum += dg * wv;
  }
  return sum;
}

Vector convection_load(const FeSpace& target, const FeSpace& source, const Weight& w, Point d,
                       const Vector& u) {
  Vector y = Vector::Zero(target.dim());
  std::vector<QuadraturePoint> qp;
  for_each_cell(target, source, [&](const Triangle& k, int lt, int ls) {
    if (!w.may_intersect(k)) return;
    const auto& ds = source.element_dofs(ls);
    const auto& ss = source.shape(ls);
    double xs[3];
    Point g{};
    bool any = false;
    for (int j = 0; j < 3; ++j) {
      xs[j] = ds[j] >= 0 ? u[ds[j]] : 0.0;
      g = g + xs[j] * ss.grad[j];
      any = any || xs[j] != 0.0;
    }
    if (!any) return;
    const double dgu = dot(d, g);
    qp.clear();
    w.rule(k, qp);
    const auto& dt = target.element_dofs(lt);
    const auto& st = target.shape(lt);
    for (const auto& q : qp) {
      const auto a = st.barycentric(q.x);
      const auto b = ss.barycentric(q.x);
      const double uq = b[0] * xs[0] + b[1] * xs[1] + b[2] * xs[2];
      for (int i = 0; i < 3; ++i) {
        if (dt[i] >= 0) y[dt[i]] += q.weight * (a[i] * dgu + uq * dot(d, st.grad[i]));
      }
    }
  });
  return y;
}

}  // namespace goafem
