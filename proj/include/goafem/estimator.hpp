#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "goafem/goals.hpp"
#include "goafem/mlspace.hpp"
#include "goafem/solver.hpp"

namespace goafem {

/// <L, phi_i P_nu> for the basis functions of `target`.
using LoadFn = std::function<Vector(const MultiIndex& nu, const FeSpace& target)>;

/// Load of the primal problem: only the zero index carries F.
LoadFn primal_load(const RhsSpec& rhs);

/// v -> L(v) - B(w, v), evaluable on v = phi P_nu for any FE space of the
/// initial mesh's family and any index nu. Linear combinations are kept
/// term by term.
class ResidualFunctional {
 public:
  ResidualFunctional(const MultilevelStructure& s, MlFunction w, LoadFn load,
                     CoefficientField coeff = CoefficientField{});

  Vector evaluate(const MultiIndex& nu, const FeSpace& target) const;

  ResidualFunctional& operator*=(double s);
  ResidualFunctional& operator+=(const ResidualFunctional& other);
  friend ResidualFunctional operator*(double s, ResidualFunctional r) { return r *= s; }
  friend ResidualFunctional operator+(ResidualFunctional a, const ResidualFunctional& b) {
    return a += b;
  }

 private:
  struct Term {
    std::shared_ptr<const MultilevelStructure> s;
    MlFunction w;
    LoadFn load;
    double scale = 1.0;
  };
  std::vector<Term> terms_;
  CoefficientField coeff_;
};

/// F(v) - B(u, v).
ResidualFunctional primal_residual(const MultilevelStructure& s, const MlFunction& u,
                                   const RhsSpec& rhs, const CoefficientField& coeff = CoefficientField{});

/// <g'(u), v> - B(v, z).
ResidualFunctional dual_residual(const MultilevelStructure& s, const GoalFunctional& goal,
                                 const MlFunction& u, const MlFunction& z,
                                 const CoefficientField& coeff = CoefficientField{});

struct SpatialIndicator {
  int block = 0;
  NewVertex vertex;
  double value = 0.0;
};

struct ParametricIndicator {
  MultiIndex index;
  double value = 0.0;
};

struct IndicatorBundle {
  std::vector<SpatialIndicator> spatial;
  std::vector<ParametricIndicator> parametric;
  double total = 0.0;

  double spatial_sq() const;
  double parametric_sq() const;
};

/// sqrt(r^T A0^{-1} r) with r the residual tested against X_0 P_nu.
double parametric_indicator(const ResidualFunctional& res, const MultiIndex& nu,
                            const FeSpace& coarse, const Factorization& a0);

/// |res(phi_xi P_nu)| / ||phi_xi|| for the fine hat at the new vertex xi of
/// block k. Convenience for single evaluations; bundles batch this.
double spatial_indicator(const ResidualFunctional& res, const MultilevelStructure& s, int k,
                         const NewVertex& xi);

/// Indicator bundles for several residuals of the same structure, sharing the
/// uniformly refined meshes. Without parametric enrichment Q is empty.
std::vector<IndicatorBundle> estimate_bundles(const MultilevelStructure& s,
                                              std::span<const ResidualFunctional* const> residuals,
                                              FactorCache& cache, bool parametric = true);

IndicatorBundle estimate_bundle(const ResidualFunctional& res, const MultilevelStructure& s,
                                FactorCache& cache, bool parametric = true);

}  // namespace goafem
