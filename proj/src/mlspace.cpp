#include "goafem/mlspace.hpp"

#include <unordered_map>

namespace goafem {

namespace {

// Reuses one FeSpace per distinct mesh.
class SpacePool {
 public:
  SpacePtr get(const MeshPtr& mesh) {
    auto [lo, hi] = pool_.equal_range(mesh->hash());
    for (auto it = lo; it != hi; ++it) {
      if (it->second->mesh_ptr() == mesh || it->second->mesh() == *mesh) return it->second;
    }
    auto space = std::make_shared<const FeSpace>(mesh);
    pool_.emplace(mesh->hash(), space);
    return space;
  }

 private:
  std::unordered_multimap<std::uint64_t, SpacePtr> pool_;
};

}  // namespace

MultilevelStructure::MultilevelStructure(MeshPtr t0)
    : MultilevelStructure(t0, IndexSet{}, std::vector<MeshPtr>{t0}) {}

MultilevelStructure::MultilevelStructure(MeshPtr t0, IndexSet indices, std::vector<MeshPtr> meshes)
    : t0_(std::move(t0)), indices_(std::move(indices)) {
  if (static_cast<int>(meshes.size()) != indices_.size()) {
    throw PreconditionError("one mesh per index is required");
  }
  SpacePool pool;
  coarse_ = pool.get(t0_);
  spaces_.reserve(meshes.size());
  for (const auto& m : meshes) {
    if (!m->same_family(*t0_)) {
      throw StructuralError("mesh is not an NVB refinement of the initial mesh");
    }
    spaces_.push_back(pool.get(m));
  }
}

int MultilevelStructure::dim() const {
  int n = 0;
  for (const auto& s : spaces_) n += s->dim();
  return n;
}

namespace {

bool mesh_refines(const Mesh& fine, const Mesh& coarse) {
  if (!fine.same_family(coarse)) return false;
  const Forest& f = fine.forest();
  for (int leaf : fine.leaves()) {
    int n = leaf;
    while (n >= 0 && coarse.leaf_index(n) < 0) n = f.node(n).parent;
    if (n < 0) return false;
  }
  return true;
}

}  // namespace

bool MultilevelStructure::refines(const MultilevelStructure& coarse) const {
  for (int k = 0; k < coarse.size(); ++k) {
    const int pos = indices_.find(coarse.index(k));
    if (pos < 0 || !mesh_refines(mesh(pos), coarse.mesh(k))) return false;
  }
  return true;
}

MlFunction MlFunction::zeros(const MultilevelStructure& s) {
  MlFunction f;
  f.blocks.reserve(s.size());
  for (int k = 0; k < s.size(); ++k) f.blocks.push_back(Vector::Zero(s.space(k).dim()));
  return f;
}

int MlFunction::dim() const {
  int n = 0;
  for (const auto& b : blocks) n += static_cast<int>(b.size());
  return n;
}

double MlFunction::dot(const MlFunction& other) const {
  double s = 0.0;
  for (std::size_t k = 0; k < blocks.size(); ++k) s += blocks[k].dot(other.blocks[k]);
  return s;
}

MlFunction& MlFunction::operator+=(const MlFunction& o) {
  for (std::size_t k = 0; k < blocks.size(); ++k) blocks[k] += o.blocks[k];
  return *this;
}

MlFunction& MlFunction::operator-=(const MlFunction& o) {
  for (std::size_t k = 0; k < blocks.size(); ++k) blocks[k] -= o.blocks[k];
  return *this;
}

MlFunction& MlFunction::operator*=(double s) {
  for (auto& b : blocks) b *= s;
  return *this;
}

void MlFunction::axpy(double s, const MlFunction& o) {
  for (std::size_t k = 0; k < blocks.size(); ++k) blocks[k] += s * o.blocks[k];
}

MlFunction BlockOperator::apply(const MlFunction& x) const {
  MlFunction y = apply_mean(x);
  for (const auto& c : off) {
    y.blocks[c.row] += c.weight * (*c.matrix * x.blocks[c.col]);
    y.blocks[c.col] += c.weight * (c.matrix->transpose() * x.blocks[c.row]);
  }
  return y;
}

MlFunction BlockOperator::apply_mean(const MlFunction& x) const {
  MlFunction y;
  y.blocks.reserve(diag.size());
  for (std::size_t k = 0; k < diag.size(); ++k) y.blocks.push_back(*diag[k] * x.blocks[k]);
  return y;
}

OperatorAssembler::OperatorAssembler(CoefficientField coeff) : coeff_(coeff) {}

std::shared_ptr<const SparseMatrix> OperatorAssembler::lookup(std::map<Key, Entry>& cache,
                                                              const Key& key, const MeshPtr& a,
                                                              const MeshPtr& b) {
  auto it = cache.find(key);
  if (it == cache.end()) return nullptr;
  Entry& e = it->second;
  if ((e.a == a || *e.a == *a) && (e.b == b || *e.b == *b)) {
    e.used = true;
    ++hits_;
    return e.matrix;
  }
  cache.erase(it);  // hash collision; rebuild
  return nullptr;
}

std::shared_ptr<const SparseMatrix> OperatorAssembler::stiffness_block(const SpacePtr& space) {
  const Key key{space->mesh().hash(), space->mesh().hash(), 0};
  if (auto m = lookup(diag_cache_, key, space->mesh_ptr(), space->mesh_ptr())) return m;
  auto m = std::make_shared<const SparseMatrix>(stiffness(*space, coeff_.mean()));
  diag_cache_[key] = {space->mesh_ptr(), space->mesh_ptr(), m, true};
  return m;
}

std::shared_ptr<const SparseMatrix> OperatorAssembler::coupling_block(const SpacePtr& row,
                                                                      const SpacePtr& col, int m) {
  const Key key{row->mesh().hash(), col->mesh().hash(), m};
  if (auto mat = lookup(off_cache_, key, row->mesh_ptr(), col->mesh_ptr())) return mat;
  auto mat = std::make_shared<const SparseMatrix>(cross_stiffness(*row, *col, coeff_.mode(m)));
  off_cache_[key] = {row->mesh_ptr(), col->mesh_ptr(), mat, true};
  return mat;
}

BlockOperator OperatorAssembler::build(const MultilevelStructure& s) {
  for (auto& [k, e] : diag_cache_) e.used = false;
  for (auto& [k, e] : off_cache_) e.used = false;

  BlockOperator op;
  for (int k = 0; k < s.size(); ++k) op.diag.push_back(stiffness_block(s.space_ptr(k)));
  const int mmax = s.indices().max_param();
  for (int r = 0; r < s.size(); ++r) {
    for (int m = 1; m <= mmax + 1; ++m) {
      const auto mu = s.index(r).shifted(m, 1);
      const int c = s.indices().find(*mu);
      if (c < 0) continue;
      const double w = coupling_coeff(s.index(r)[m] + 1);
      const int lo = std::min(r, c), hi = std::max(r, c);
      op.off.push_back({lo, hi, m, w, coupling_block(s.space_ptr(lo), s.space_ptr(hi), m)});
    }
  }

  std::erase_if(diag_cache_, [](const auto& kv) { return !kv.second.used; });
  std::erase_if(off_cache_, [](const auto& kv) { return !kv.second.used; });
  return op;
}

MultilevelStructure enriched_structure(const MultilevelStructure& s, bool parametric) {
  std::vector<MultiIndex> extra;
  if (parametric) extra = detail_set(s.indices());
  IndexSet all = s.indices().merged(extra);

  std::unordered_map<const Mesh*, MeshPtr> refined;
  std::vector<MeshPtr> meshes(all.size());
  for (int k = 0; k < s.size(); ++k) {
    auto& fine = refined[&s.mesh(k)];
    if (!fine) fine = std::make_shared<const Mesh>(uniform_refine(s.mesh(k)));
    meshes[all.find(s.index(k))] = fine;
  }
  for (const auto& nu : extra) meshes[all.find(nu)] = s.initial_mesh();
  return MultilevelStructure(s.initial_mesh(), std::move(all), std::move(meshes));
}

bool MultilevelMarks::empty() const {
  if (!indices.empty()) return false;
  for (const auto& v : vertices) {
    if (!v.empty()) return false;
  }
  return true;
}

MultilevelStructure refine_structure(const MultilevelStructure& s, const MultilevelMarks& marks) {
  if (!marks.vertices.empty() && static_cast<int>(marks.vertices.size()) != s.size()) {
    throw PreconditionError("vertex marks must be given per block");
  }
  if (!marks.indices.empty()) {
    const auto q = detail_set(s.indices());
    for (const auto& nu : marks.indices) {
      if (!std::binary_search(q.begin(), q.end(), nu)) {
        throw PreconditionError("marked index " + nu.to_string() + " is not in the detail set");
      }
    }
  }
  IndexSet all = s.indices().merged(marks.indices);
  std::vector<MeshPtr> meshes(all.size(), s.initial_mesh());
  for (int k = 0; k < s.size(); ++k) {
    MeshPtr m = s.mesh_ptr(k);
    if (!marks.vertices.empty() && !marks.vertices[k].empty()) {
      m = std::make_shared<const Mesh>(refine_nvb(*m, marks.vertices[k]));
    }
    meshes[all.find(s.index(k))] = m;
  }
  return MultilevelStructure(s.initial_mesh(), std::move(all), std::move(meshes));
}

SparseMatrix space_prolongation(const FeSpace& from, const FeSpace& to) {
  const SparseMatrix full = prolongation(from.mesh(), to.mesh());
  std::vector<Eigen::Triplet<double>> trips;
  for (int c = 0; c < full.outerSize(); ++c) {
    const int cd = from.dof(c);
    if (cd < 0) continue;
    for (SparseMatrix::InnerIterator it(full, c); it; ++it) {
      const int rd = to.dof(static_cast<int>(it.row()));
      if (rd >= 0) trips.emplace_back(rd, cd, it.value());
    }
  }
  SparseMatrix p(to.dim(), from.dim());
  p.setFromTriplets(trips.begin(), trips.end());
  return p;
}

MlFunction embed(const MlFunction& f, const MultilevelStructure& from, const MultilevelStructure& to) {
  MlFunction g = MlFunction::zeros(to);
  for (int k = 0; k < from.size(); ++k) {
    const int pos = to.indices().find(from.index(k));
    if (pos < 0) throw StructuralError("target structure lacks index " + from.index(k).to_string());
    if (to.mesh_ptr(pos) == from.mesh_ptr(k)) {
      g.blocks[pos] = f.blocks[k];
    } else {
      g.blocks[pos] = space_prolongation(from.space(k), to.space(pos)) * f.blocks[k];
    }
  }
  return g;
}

}  // namespace goafem
