#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/SparseCore>

#include "goafem/geometry.hpp"

namespace goafem {

/// Raised when two meshes do not belong to the same refinement family, or a
/// refinement relation assumed by the caller does not hold.
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an operation's documented precondition is violated.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Append-only record of every triangle ever produced by newest vertex
/// bisection from one initial mesh. All meshes of a family share one forest,
/// so identical triangles have identical node ids across meshes.
///
/// Node vertex order: the refinement edge is (v[0], v[1]) and v[2] is the
/// newest vertex; vertices are counter-clockwise.
class Forest {
 public:
  struct Node {
    std::array<int, 3> v;
    int parent = -1;
    std::array<int, 2> child{-1, -1};
    int root = 0;
    int level = 0;
  };

  Forest(std::vector<Point> vertices, const std::vector<std::array<int, 3>>& roots);

  int num_roots() const { return num_roots_; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  const Node& node(int id) const { return nodes_[id]; }
  const Point& vertex(int id) const { return vertices_[id]; }
  Triangle triangle(int id) const;

  /// Bisects a node across its refinement edge; returns the existing
  /// children if the node was bisected before.
  std::array<int, 2> bisect(int id);

  /// Global id of the midpoint of (a, b), or -1 if never created.
  int find_midpoint(int a, int b) const;

  /// Identifier unique to this forest within the process.
  std::uint64_t family_id() const { return family_id_; }

 private:
  int midpoint_vertex(int a, int b);

  std::vector<Point> vertices_;
  std::vector<Node> nodes_;
  std::unordered_map<std::uint64_t, int> midpoints_;
  int num_roots_ = 0;
  std::uint64_t family_id_ = 0;
};

/// An edge of a mesh in local vertex numbering, a < b. `tri[1]` is -1 for
/// boundary edges.
struct Edge {
  int a = -1;
  int b = -1;
  std::array<int, 2> tri{-1, -1};
  bool boundary() const { return tri[1] < 0; }
};

/// Vertex created by uniform refinement: the midpoint of edge (a, b) of the
/// coarse mesh (local vertex ids).
struct NewVertex {
  int a = -1;
  int b = -1;
  Point x;
  friend bool operator==(const NewVertex& l, const NewVertex& r) { return l.a == r.a && l.b == r.b; }
};

using VertexSet = std::vector<NewVertex>;

/// Conforming triangulation belonging to the NVB family of an initial mesh.
/// Immutable; refinement creates new meshes.
class Mesh {
 public:
  /// Builds the mesh whose elements are the given forest leaves (any order;
  /// stored in canonical depth-first order).
  static Mesh from_leaves(std::shared_ptr<Forest> forest, std::vector<int> leaves);

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_triangles() const { return static_cast<int>(triangles_.size()); }
  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<char>& boundary() const { return boundary_; }
  const std::vector<Edge>& edges() const { return edges_; }
  /// Per-triangle edge indices: {refinement edge (v0,v1), (v1,v2), (v2,v0)}.
  const std::vector<std::array<int, 3>>& triangle_edges() const { return tri_edges_; }
  std::vector<int> generation() const;

  Triangle triangle(int t) const;
  double min_angle() const;
  double area() const;

  std::span<const int> leaves() const { return leaves_; }
  int global_vertex(int local) const { return global_vertex_[local]; }
  /// Local index of a forest vertex, -1 if absent.
  int local_vertex(int global) const;
  /// Position of a forest node among this mesh's elements, -1 if not a leaf.
  int leaf_index(int node) const {
    auto it = leaf_pos_.find(node);
    return it == leaf_pos_.end() ? -1 : it->second;
  }

  const Forest& forest() const { return *forest_; }
  const std::shared_ptr<Forest>& forest_ptr() const { return forest_; }
  std::uint64_t hash() const { return hash_; }
  bool same_family(const Mesh& other) const { return forest_ == other.forest_; }

  friend bool operator==(const Mesh& a, const Mesh& b) {
    return a.forest_ == b.forest_ && a.leaves_ == b.leaves_;
  }

 private:
  Mesh() = default;

  std::shared_ptr<Forest> forest_;
  std::vector<int> leaves_;
  std::unordered_map<int, int> leaf_pos_;
  std::vector<int> global_vertex_;
  std::unordered_map<int, int> local_vertex_;
  std::vector<Point> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<char> boundary_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> tri_edges_;
  std::uint64_t hash_ = 0;
};

using MeshPtr = std::shared_ptr<const Mesh>;

enum class DomainKind { unit_square, l_shaped, slit };

struct DomainSpec {
  DomainKind kind = DomainKind::unit_square;
  double slit_width = 0.005;  // half-opening delta of the slit wedge
};

std::string to_string(DomainKind kind);

/// Structured initial mesh of right-angled triangles.
Mesh initial_mesh(const DomainSpec& domain, int target_count);

Mesh uniform_refine(const Mesh& mesh);

/// Coarsest NVB refinement containing every marked vertex.
Mesh refine_nvb(const Mesh& mesh, std::span<const NewVertex> marked);

/// Interior vertices created by uniform refinement, one per interior edge,
/// ordered by (a, b).
VertexSet new_interior_vertices(const Mesh& mesh);

/// Local index, in `fine` (= uniform_refine(coarse) or any refinement
/// containing it), of the midpoint vertex `v` of `coarse`.
int fine_vertex_index(const Mesh& coarse, const Mesh& fine, const NewVertex& v);

/// Visits every element of the coarsest common refinement of a and b.
/// `fn(node, leaf_in_a, leaf_in_b)` receives the forest node of the overlay
/// element and the positions of the elements of a and b containing it.
template <class Fn>
void for_each_overlay_cell(const Mesh& a, const Mesh& b, Fn&& fn);

/// Prolongation of P1 nodal values from `from` to `to` (all vertices,
/// including boundary). Requires `to` to refine `from`.
Eigen::SparseMatrix<double> prolongation(const Mesh& from, const Mesh& to);

struct Overlay {
  Mesh mesh;
  Eigen::SparseMatrix<double> from_a;  // overlay vertices x a vertices
  Eigen::SparseMatrix<double> from_b;  // overlay vertices x b vertices
};

Overlay common_refinement(const Mesh& a, const Mesh& b);

/// `nv nt`, then `x y boundary_flag` per vertex, then `v0 v1 v2` per triangle.
void write_mesh(std::ostream& os, const Mesh& mesh);

// ---------------------------------------------------------------------------

template <class Fn>
void for_each_overlay_cell(const Mesh& a, const Mesh& b, Fn&& fn) {
  if (!a.same_family(b)) {
    throw StructuralError("meshes do not belong to the same refinement family");
  }
  const Forest& forest = a.forest();
  struct Item {
    int node, la, lb;
  };
  std::vector<Item> stack;
  for (int r = forest.num_roots() - 1; r >= 0; --r) stack.push_back({r, -1, -1});
  while (!stack.empty()) {
    Item it = stack.back();
    stack.pop_back();
    if (it.la < 0) it.la = a.leaf_index(it.node);
    if (it.lb < 0) it.lb = b.leaf_index(it.node);
    if (it.la >= 0 && it.lb >= 0) {
      fn(it.node, it.la, it.lb);
      continue;
    }
    const auto& n = forest.node(it.node);
    if (n.child[0] < 0) {
      throw StructuralError("mesh does not cover the forest node");
    }
    stack.push_back({n.child[1], it.la, it.lb});
    stack.push_back({n.child[0], it.la, it.lb});
  }
}

}  // namespace goafem
