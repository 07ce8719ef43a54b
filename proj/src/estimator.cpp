#include "goafem/estimator.hpp"

#include <cmath>
#include <unordered_map>

namespace goafem {

LoadFn primal_load(const RhsSpec& rhs) {
  return [rhs](const MultiIndex& nu, const FeSpace& target) -> Vector {
    if (!nu.is_zero()) return Vector::Zero(target.dim());
    switch (rhs.kind) {
      case RhsKind::constant_one: return load_constant_one(target);
      case RhsKind::directional_derivative:
        return load_directional(target, std::span<const Point>(rhs.region.data(), 3));
      case RhsKind::zero: return Vector::Zero(target.dim());
    }
    return Vector::Zero(target.dim());
  };
}

ResidualFunctional::ResidualFunctional(const MultilevelStructure& s, MlFunction w, LoadFn load,
                                       CoefficientField coeff)
    : coeff_(coeff) {
  terms_.push_back({std::make_shared<const MultilevelStructure>(s), std::move(w), std::move(load), 1.0});
}

ResidualFunctional& ResidualFunctional::operator*=(double s) {
  for (auto& t : terms_) t.scale *= s;
  return *this;
}

ResidualFunctional& ResidualFunctional::operator+=(const ResidualFunctional& other) {
  terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
  return *this;
}

Vector ResidualFunctional::evaluate(const MultiIndex& nu, const FeSpace& target) const {
  Vector r = Vector::Zero(target.dim());
  for (const auto& term : terms_) {
    if (term.scale == 0.0) continue;
    Vector part = term.load ? term.load(nu, target) : Vector::Zero(target.dim());
    const MultilevelStructure& s = *term.s;
    for (int k = 0; k < s.size(); ++k) {
      const Coupling c = coupling_weight(nu, s.index(k));
      if (c.kind == Coupling::Kind::none) continue;
      const Vector& wk = term.w.blocks[k];
      if (wk.size() == 0 || wk.isZero(0.0)) continue;
      if (c.kind == Coupling::Kind::diagonal) {
        part -= cross_apply(target, s.space(k), coeff_.mean(), wk);
      } else {
        part -= c.weight * cross_apply(target, s.space(k), coeff_.mode(c.m), wk);
      }
    }
    r += term.scale * part;
  }
  return r;
}

ResidualFunctional primal_residual(const MultilevelStructure& s, const MlFunction& u,
                                   const RhsSpec& rhs, const CoefficientField& coeff) {
  return ResidualFunctional(s, u, primal_load(rhs), coeff);
}

ResidualFunctional dual_residual(const MultilevelStructure& s, const GoalFunctional& goal,
                                 const MlFunction& u, const MlFunction& z,
                                 const CoefficientField& coeff) {
  auto structure = std::make_shared<const MultilevelStructure>(s);
  LoadFn load = [structure, goal, u](const MultiIndex& nu, const FeSpace& target) {
    return goal.derivative_block(*structure, u, nu, target);
  };
  return ResidualFunctional(s, z, std::move(load), coeff);
}

double IndicatorBundle::spatial_sq() const {
  double s = 0.0;
  for (const auto& i : spatial) s += i.value * i.value;
  return s;
}

double IndicatorBundle::parametric_sq() const {
  double s = 0.0;
  for (const auto& i : parametric) s += i.value * i.value;
  return s;
}

double parametric_indicator(const ResidualFunctional& res, const MultiIndex& nu,
                            const FeSpace& coarse, const Factorization& a0) {
  const Vector r = res.evaluate(nu, coarse);
  if (r.size() == 0) return 0.0;
  const Vector e = a0.solve(r);
  return std::sqrt(std::max(r.dot(e), 0.0));
}

double spatial_indicator(const ResidualFunctional& res, const MultilevelStructure& s, int k,
                         const NewVertex& xi) {
  auto fine = std::make_shared<const Mesh>(uniform_refine(s.mesh(k)));
  const FeSpace space(fine);
  const int dof = space.dof(fine_vertex_index(s.mesh(k), *fine, xi));
  if (dof < 0) throw PreconditionError("vertex is not a new interior vertex");
  const Vector r = res.evaluate(s.index(k), space);
  return std::abs(r[dof]) / std::sqrt(stiffness_diagonal(space)[dof]);
}

std::vector<IndicatorBundle> estimate_bundles(const MultilevelStructure& s,
                                              std::span<const ResidualFunctional* const> residuals,
                                              FactorCache& cache, bool parametric) {
  std::vector<IndicatorBundle> out(residuals.size());

  struct Fine {
    std::shared_ptr<const FeSpace> space;
    Vector diag;
    VertexSet vertices;
    std::vector<int> dofs;
  };
  std::unordered_map<const Mesh*, Fine> fine_of;
  for (int k = 0; k < s.size(); ++k) {
    Fine& f = fine_of[&s.mesh(k)];
    if (!f.space) {
      auto mesh = std::make_shared<const Mesh>(uniform_refine(s.mesh(k)));
      f.space = std::make_shared<const FeSpace>(mesh);
      f.diag = stiffness_diagonal(*f.space);
      f.vertices = new_interior_vertices(s.mesh(k));
      f.dofs.reserve(f.vertices.size());
      for (const auto& v : f.vertices) f.dofs.push_back(f.space->dof(fine_vertex_index(s.mesh(k), *mesh, v)));
    }
    for (std::size_t r = 0; r < residuals.size(); ++r) {
      const Vector res = residuals[r]->evaluate(s.index(k), *f.space);
      for (std::size_t i = 0; i < f.vertices.size(); ++i) {
        const int d = f.dofs[i];
        out[r].spatial.push_back({k, f.vertices[i], std::abs(res[d]) / std::sqrt(f.diag[d])});
      }
    }
  }

  if (parametric) {
    const auto q = detail_set(s.indices());
    if (!q.empty()) {
      const FeSpace& coarse = *s.coarse_space();
      const auto a0 = cache.get(coarse);
      for (const auto& nu : q) {
        for (std::size_t r = 0; r < residuals.size(); ++r) {
          out[r].parametric.push_back({nu, parametric_indicator(*residuals[r], nu, coarse, *a0)});
        }
      }
    }
  }

  for (auto& b : out) b.total = std::sqrt(b.spatial_sq() + b.parametric_sq());
  return out;
}

IndicatorBundle estimate_bundle(const ResidualFunctional& res, const MultilevelStructure& s,
                                FactorCache& cache, bool parametric) {
  const ResidualFunctional* list[] = {&res};
  return estimate_bundles(s, list, cache, parametric).front();
}

}  // namespace goafem
