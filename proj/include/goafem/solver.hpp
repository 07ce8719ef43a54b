#pragma once

#include <map>
#include <memory>
#include <stdexcept>

#include <Eigen/SparseCholesky>

#include "goafem/mlspace.hpp"

namespace goafem {

struct SolveReport {
  int iterations = 0;
  double relative_residual = 0.0;
  int cache_hits = 0;
};

class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, SolveReport report)
      : std::runtime_error(what), report_(report) {}
  const SolveReport& report() const { return report_; }

 private:
  SolveReport report_;
};

using Factorization = Eigen::SimplicialLDLT<SparseMatrix>;

/// Sparse Cholesky factors of a0-stiffness matrices, keyed by mesh.
class FactorCache {
 public:
  std::shared_ptr<const Factorization> get(const FeSpace& space, const SparseMatrix& a0);
  std::shared_ptr<const Factorization> get(const FeSpace& space);
  int hits() const { return hits_; }
  /// Drops factors whose meshes are not among `keep`.
  void retain(const std::vector<const Mesh*>& keep);

 private:
  struct Entry {
    MeshPtr mesh;
    std::shared_ptr<const Factorization> factor;
  };
  std::multimap<std::uint64_t, Entry> cache_;
  int hits_ = 0;
};

struct SolverOptions {
  double tol = 1e-10;
  /// 0 means max(10 dim, 1000).
  int max_iterations = 0;
};

/// PCG for op x = rhs preconditioned by exact solves with the diagonal blocks.
std::pair<MlFunction, SolveReport> solve(const BlockOperator& op, const MultilevelStructure& s,
                                         const MlFunction& rhs, FactorCache& cache,
                                         const SolverOptions& options = {});

/// ||op x - rhs|| / ||rhs||, with 0 for a zero system.
double galerkin_residual_check(const BlockOperator& op, const MlFunction& x, const MlFunction& rhs);

}  // namespace goafem
