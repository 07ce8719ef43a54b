#include "goafem/solver.hpp"

#include <algorithm>
#include <cmath>

namespace goafem {

std::shared_ptr<const Factorization> FactorCache::get(const FeSpace& space, const SparseMatrix& a0) {
  const Mesh& mesh = space.mesh();
  auto [lo, hi] = cache_.equal_range(mesh.hash());
  for (auto it = lo; it != hi; ++it) {
    if (it->second.mesh == space.mesh_ptr() || *it->second.mesh == mesh) {
      ++hits_;
      return it->second.factor;
    }
  }
  auto f = std::make_shared<Factorization>(a0);
  if (f->info() != Eigen::Success) {
    throw NonConvergenceError("factorization of a diagonal block failed", {});
  }
  cache_.emplace(mesh.hash(), Entry{space.mesh_ptr(), f});
  return f;
}

std::shared_ptr<const Factorization> FactorCache::get(const FeSpace& space) {
  auto [lo, hi] = cache_.equal_range(space.mesh().hash());
  for (auto it = lo; it != hi; ++it) {
    if (it->second.mesh == space.mesh_ptr() || *it->second.mesh == space.mesh()) {
      ++hits_;
      return it->second.factor;
    }
  }
  return get(space, stiffness(space, ScalarField::constant(1.0)));
}

void FactorCache::retain(const std::vector<const Mesh*>& keep) {
  std::erase_if(cache_, [&](const auto& kv) {
    return std::none_of(keep.begin(), keep.end(),
                        [&](const Mesh* m) { return *m == *kv.second.mesh; });
  });
}

std::pair<MlFunction, SolveReport> solve(const BlockOperator& op, const MultilevelStructure& s,
                                         const MlFunction& rhs, FactorCache& cache,
                                         const SolverOptions& options) {
  const int hits0 = cache.hits();
  std::vector<std::shared_ptr<const Factorization>> pre;
  pre.reserve(s.size());
  for (int k = 0; k < s.size(); ++k) pre.push_back(cache.get(s.space(k), *op.diag[k]));

  auto precondition = [&](const MlFunction& r) {
    MlFunction z;
    z.blocks.reserve(r.blocks.size());
    for (std::size_t k = 0; k < r.blocks.size(); ++k) {
      z.blocks.push_back(r.blocks[k].size() ? Vector(pre[k]->solve(r.blocks[k])) : r.blocks[k]);
    }
    return z;
  };

  SolveReport report;
  MlFunction x = MlFunction::zeros(s);
  const double bnorm = rhs.norm();
  if (bnorm == 0.0) {
    report.cache_hits = cache.hits() - hits0;
    return {x, report};
  }
  const int dim = rhs.dim();
  const int cap = options.max_iterations > 0 ? options.max_iterations : std::max(10 * dim, 1000);

  MlFunction r = rhs;
  MlFunction z = precondition(r);
  MlFunction p = z;
  double rz = r.dot(z);
  double rel = 1.0;
  int it = 0;
  while (true) {
    rel = r.norm() / bnorm;
    if (rel <= options.tol) {
      // Confirm with the true residual; restart from it if the recursion drifted.
      r = rhs - op.apply(x);
      rel = r.norm() / bnorm;
      if (rel <= options.tol) break;
      z = precondition(r);
      p = z;
      rz = r.dot(z);
    }
    if (it >= cap) {
      report.iterations = it;
      report.relative_residual = rel;
      report.cache_hits = cache.hits() - hits0;
      throw NonConvergenceError("PCG did not converge within the iteration cap", report);
    }
    const MlFunction q = op.apply(p);
    const double alpha = rz / p.dot(q);
    x.axpy(alpha, p);
    r.axpy(-alpha, q);
    ++it;
    // Recompute the true residual now and then to avoid drift.
    if (it % 50 == 0) r = rhs - op.apply(x);
    z = precondition(r);
    const double rz_new = r.dot(z);
    const double beta = rz_new / rz;
    rz = rz_new;
    p *= beta;
    p += z;
  }
  report.iterations = it;
  report.relative_residual = rel;
  report.cache_hits = cache.hits() - hits0;
  return {x, report};
}

double galerkin_residual_check(const BlockOperator& op, const MlFunction& x, const MlFunction& rhs) {
  const double b = rhs.norm();
  const double r = (op.apply(x) - rhs).norm();
  if (b == 0.0) return r == 0.0 ? 0.0 : r;
  return r / b;
}

}  // namespace goafem
