#include "fixtures.hpp"

namespace fixtures {

MeshPtr random_refinement(const Mesh& mesh, std::mt19937_64& rng, int rounds, double fraction) {
  auto cur = std::make_shared<const Mesh>(mesh);
  std::bernoulli_distribution pick(fraction);
  for (int r = 0; r < rounds; ++r) {
    VertexSet marks;
    for (const auto& v : new_interior_vertices(*cur)) {
      if (pick(rng)) marks.push_back(v);
    }
    cur = std::make_shared<const Mesh>(refine_nvb(*cur, marks));
  }
  return cur;
}

MultilevelStructure random_structure(const MeshPtr& t0, std::mt19937_64& rng, int extra_indices,
                                     int rounds) {
  MultilevelStructure s(t0);
  for (int i = 0; i < extra_indices; ++i) {
    const auto q = detail_set(s.indices());
    std::uniform_int_distribution<std::size_t> pick(0, q.size() - 1);
    MultilevelMarks marks;
    marks.indices.push_back(q[pick(rng)]);
    s = refine_structure(s, marks);
  }
  std::uniform_int_distribution<int> nr(0, rounds);
  std::vector<MeshPtr> meshes;
  for (int k = 0; k < s.size(); ++k) meshes.push_back(random_refinement(*t0, rng, nr(rng)));
  return MultilevelStructure(t0, s.indices(), meshes);
}

MlFunction random_function(const MultilevelStructure& s, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  MlFunction f = MlFunction::zeros(s);
  for (auto& b : f.blocks) {
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = g(rng);
  }
  return f;
}

AdaptiveProblem small_problem(int triangles, int setup) {
  AdaptiveProblem p = AdaptiveProblem::for_setup(setup);
  p.t0 = square(triangles);
  return p;
}

}  // namespace fixtures
