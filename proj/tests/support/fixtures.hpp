#pragma once

#include <random>

#include "goafem/adaptive.hpp"
#include "goafem/mesh.hpp"
#include "goafem/mlspace.hpp"

namespace fixtures {

using namespace goafem;

inline MeshPtr square(int triangles) {
  return std::make_shared<const Mesh>(initial_mesh({DomainKind::unit_square}, triangles));
}

/// `rounds` NVB steps, each marking a random fraction of the new interior vertices.
MeshPtr random_refinement(const Mesh& mesh, std::mt19937_64& rng, int rounds, double fraction = 0.2);

/// Random index set grown from the detail sets, with random meshes per index.
MultilevelStructure random_structure(const MeshPtr& t0, std::mt19937_64& rng, int extra_indices,
                                     int rounds);

MlFunction random_function(const MultilevelStructure& s, std::mt19937_64& rng);

/// Setup-1 style problem on a small initial mesh.
AdaptiveProblem small_problem(int triangles, int setup = 1);

}  // namespace fixtures
