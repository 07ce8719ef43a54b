#pragma once

#include <map>
#include <memory>
#include <tuple>
#include <vector>

#include "goafem/fem.hpp"
#include "goafem/param.hpp"
#include "goafem/problem.hpp"

namespace goafem {

/// Index set P together with one NVB mesh per active index. Indices outside
/// P implicitly carry the initial mesh.
class MultilevelStructure {
 public:
  /// P = {0} on the initial mesh.
  explicit MultilevelStructure(MeshPtr t0);
  /// Meshes aligned with the (sorted) index set.
  MultilevelStructure(MeshPtr t0, IndexSet indices, std::vector<MeshPtr> meshes);

  const IndexSet& indices() const { return indices_; }
  int size() const { return indices_.size(); }
  const MultiIndex& index(int k) const { return indices_[k]; }
  const FeSpace& space(int k) const { return *spaces_[k]; }
  const SpacePtr& space_ptr(int k) const { return spaces_[k]; }
  const Mesh& mesh(int k) const { return spaces_[k]->mesh(); }
  const MeshPtr& mesh_ptr(int k) const { return spaces_[k]->mesh_ptr(); }

  const MeshPtr& initial_mesh() const { return t0_; }
  /// X_0 on the initial mesh.
  const SpacePtr& coarse_space() const { return coarse_; }

  /// Total dimension sum_nu dim X_nu.
  int dim() const;
  /// Meshes of this structure refine those of `coarse` and P contains coarse's P.
  bool refines(const MultilevelStructure& coarse) const;

 private:
  MeshPtr t0_;
  SpacePtr coarse_;
  IndexSet indices_;
  std::vector<SpacePtr> spaces_;
};

/// One coefficient vector per active index.
struct MlFunction {
  std::vector<Vector> blocks;

  static MlFunction zeros(const MultilevelStructure& s);
  int dim() const;
  double dot(const MlFunction& other) const;
  double norm() const { return std::sqrt(dot(*this)); }
  MlFunction& operator+=(const MlFunction& o);
  MlFunction& operator-=(const MlFunction& o);
  MlFunction& operator*=(double s);
  /// this += s * o
  void axpy(double s, const MlFunction& o);
  friend MlFunction operator+(MlFunction a, const MlFunction& b) { return a += b; }
  friend MlFunction operator-(MlFunction a, const MlFunction& b) { return a -= b; }
  friend MlFunction operator*(double s, MlFunction a) { return a *= s; }
};

/// Galerkin matrix of B on V: a0-stiffness diagonal blocks and weighted
/// cross-stiffness couplings for pairs nu, nu + e_m of the index set.
struct BlockOperator {
  struct Coupled {
    int row = 0;  // row < col
    int col = 0;
    int m = 0;
    double weight = 0.0;
    std::shared_ptr<const SparseMatrix> matrix;  // row space x col space, coefficient a_m
  };

  std::vector<std::shared_ptr<const SparseMatrix>> diag;
  std::vector<Coupled> off;

  MlFunction apply(const MlFunction& x) const;
  /// Same operator with every coupling dropped (the B0 form).
  MlFunction apply_mean(const MlFunction& x) const;
  double form(const MlFunction& x, const MlFunction& y) const { return x.dot(apply(y)); }
};

/// Builds block operators, caching stiffness blocks per mesh and coupling
/// blocks per (mesh pair, m). Blocks unused by the latest build are dropped.
class OperatorAssembler {
 public:
  explicit OperatorAssembler(CoefficientField coeff = CoefficientField{});

  const CoefficientField& coefficient() const { return coeff_; }
  BlockOperator build(const MultilevelStructure& s);

  std::shared_ptr<const SparseMatrix> stiffness_block(const SpacePtr& space);
  std::shared_ptr<const SparseMatrix> coupling_block(const SpacePtr& row, const SpacePtr& col, int m);

  int cache_hits() const { return hits_; }
  int cache_size() const { return static_cast<int>(diag_cache_.size() + off_cache_.size()); }

 private:
  struct Entry {
    MeshPtr a, b;
    std::shared_ptr<const SparseMatrix> matrix;
    bool used = false;
  };
  using Key = std::tuple<std::uint64_t, std::uint64_t, int>;

  std::shared_ptr<const SparseMatrix> lookup(std::map<Key, Entry>& cache, const Key& key,
                                             const MeshPtr& a, const MeshPtr& b);

  CoefficientField coeff_;
  std::map<Key, Entry> diag_cache_;
  std::map<Key, Entry> off_cache_;
  int hits_ = 0;
};

/// P u Q with uniformly refined meshes on P and the initial mesh on Q.
MultilevelStructure enriched_structure(const MultilevelStructure& s, bool parametric = true);

struct MultilevelMarks {
  std::vector<MultiIndex> indices;    // subset of the detail set
  std::vector<VertexSet> vertices;    // per block of the structure
  bool empty() const;
};

/// P u M with each mesh refined by its marked vertices.
MultilevelStructure refine_structure(const MultilevelStructure& s, const MultilevelMarks& marks);

/// Prolongation of f from `from` into the refined structure `to`.
MlFunction embed(const MlFunction& f, const MultilevelStructure& from, const MultilevelStructure& to);

/// Interior-DOF prolongation between two nested spaces.
SparseMatrix space_prolongation(const FeSpace& from, const FeSpace& to);

}  // namespace goafem
