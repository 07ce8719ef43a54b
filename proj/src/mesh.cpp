#include "goafem/mesh.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace goafem {

namespace {

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

std::atomic<std::uint64_t> next_family_id{1};

}  // namespace

Forest::Forest(std::vector<Point> vertices, const std::vector<std::array<int, 3>>& roots)
    : vertices_(std::move(vertices)),
      num_roots_(static_cast<int>(roots.size())),
      family_id_(next_family_id++) {
  nodes_.reserve(roots.size() * 8);
  for (std::size_t r = 0; r < roots.size(); ++r) {
    Node n;
    n.v = roots[r];
    n.root = static_cast<int>(r);
    for (int k : n.v) {
      if (k < 0 || k >= num_vertices()) throw PreconditionError("root references unknown vertex");
    }
    nodes_.push_back(n);
    if (signed_area(triangle(static_cast<int>(r))) <= 0.0) {
      throw PreconditionError("initial triangles must be counter-clockwise and nondegenerate");
    }
  }
}

Triangle Forest::triangle(int id) const {
  const auto& v = nodes_[id].v;
  return {vertices_[v[0]], vertices_[v[1]], vertices_[v[2]]};
}

int Forest::midpoint_vertex(int a, int b) {
  const auto key = edge_key(a, b);
  auto it = midpoints_.find(key);
  if (it != midpoints_.end()) return it->second;
  const int id = num_vertices();
  vertices_.push_back(midpoint(vertices_[a], vertices_[b]));
  midpoints_.emplace(key, id);
  return id;
}

int Forest::find_midpoint(int a, int b) const {
  auto it = midpoints_.find(edge_key(a, b));
  return it == midpoints_.end() ? -1 : it->second;
}

std::array<int, 2> Forest::bisect(int id) {
  if (nodes_[id].child[0] >= 0) return nodes_[id].child;
  const Node parent = nodes_[id];
  const int m = midpoint_vertex(parent.v[0], parent.v[1]);
  Node c0;
  c0.v = {parent.v[2], parent.v[0], m};
  Node c1;
  c1.v = {parent.v[1], parent.v[2], m};
  for (Node* c : {&c0, &c1}) {
    c->parent = id;
    c->root = parent.root;
    c->level = parent.level + 1;
  }
  const int i0 = num_nodes();
  nodes_.push_back(c0);
  nodes_.push_back(c1);
  nodes_[id].child = {i0, i0 + 1};
  return nodes_[id].child;
}

// ---------------------------------------------------------------------------

Mesh Mesh::from_leaves(std::shared_ptr<Forest> forest, std::vector<int> leaves) {
  if (!forest) throw PreconditionError("mesh requires a forest");
  // Canonical depth-first order: (root, left-aligned child path with sentinel).
  std::vector<std::pair<std::pair<int, std::uint64_t>, int>> keyed;
  keyed.reserve(leaves.size());
  for (int leaf : leaves) {
    const auto& n = forest->node(leaf);
    if (n.level > 62) throw StructuralError("refinement depth exceeds 62 bisections");
    std::uint64_t bits = std::uint64_t{1} << (63 - n.level);
    int cur = leaf;
    int depth = n.level;
    while (forest->node(cur).parent >= 0) {
      const int p = forest->node(cur).parent;
      if (forest->node(p).child[1] == cur) bits |= std::uint64_t{1} << (64 - depth);
      --depth;
      cur = p;
    }
    keyed.push_back({{n.root, bits}, leaf});
  }
  std::sort(keyed.begin(), keyed.end());
  for (std::size_t i = 0; i < keyed.size(); ++i) {
    leaves[i] = keyed[i].second;
    if (i > 0 && keyed[i].second == keyed[i - 1].second) throw StructuralError("duplicate leaf");
  }

  Mesh mesh;
  mesh.forest_ = std::move(forest);
  const Forest& f = *mesh.forest_;
  mesh.leaves_ = std::move(leaves);
  const int nt = static_cast<int>(mesh.leaves_.size());
  mesh.leaf_pos_.reserve(nt * 2);
  for (int t = 0; t < nt; ++t) mesh.leaf_pos_.emplace(mesh.leaves_[t], t);

  std::vector<int> gv;
  gv.reserve(3 * nt);
  for (int leaf : mesh.leaves_) {
    for (int k : f.node(leaf).v) gv.push_back(k);
  }
  std::sort(gv.begin(), gv.end());
  gv.erase(std::unique(gv.begin(), gv.end()), gv.end());
  mesh.global_vertex_ = gv;
  mesh.local_vertex_.reserve(gv.size() * 2);
  mesh.vertices_.reserve(gv.size());
  for (std::size_t i = 0; i < gv.size(); ++i) {
    mesh.local_vertex_.emplace(gv[i], static_cast<int>(i));
    mesh.vertices_.push_back(f.vertex(gv[i]));
  }
  mesh.triangles_.resize(nt);
  for (int t = 0; t < nt; ++t) {
    const auto& v = f.node(mesh.leaves_[t]).v;
    for (int k = 0; k < 3; ++k) mesh.triangles_[t][k] = mesh.local_vertex_.at(v[k]);
  }

  // Edges sorted by (a, b).
  struct Half {
    int a, b, t, k;
  };
  std::vector<Half> halves;
  halves.reserve(3 * nt);
  for (int t = 0; t < nt; ++t) {
    const auto& tv = mesh.triangles_[t];
    for (int k = 0; k < 3; ++k) {
      int a = tv[k];
      int b = tv[(k + 1) % 3];
      if (a > b) std::swap(a, b);
      halves.push_back({a, b, t, k});
    }
  }
  std::sort(halves.begin(), halves.end(), [](const Half& l, const Half& r) {
    return l.a != r.a ? l.a < r.a : (l.b != r.b ? l.b < r.b : l.t < r.t);
  });
  mesh.tri_edges_.assign(nt, {-1, -1, -1});
  for (std::size_t i = 0; i < halves.size();) {
    std::size_t j = i;
    Edge e{halves[i].a, halves[i].b, {-1, -1}};
    while (j < halves.size() && halves[j].a == e.a && halves[j].b == e.b) {
      if (j - i >= 2) throw StructuralError("edge shared by more than two triangles");
      e.tri[j - i] = halves[j].t;
      ++j;
    }
    const int id = static_cast<int>(mesh.edges_.size());
    for (std::size_t h = i; h < j; ++h) mesh.tri_edges_[halves[h].t][halves[h].k] = id;
    mesh.edges_.push_back(e);
    i = j;
  }

  mesh.boundary_.assign(gv.size(), 0);
  for (const Edge& e : mesh.edges_) {
    if (!e.boundary()) continue;
    const int m = f.find_midpoint(gv[e.a], gv[e.b]);
    if (m >= 0 && mesh.local_vertex_.count(m)) {
      throw StructuralError("nonconforming mesh: hanging node on an edge");
    }
    mesh.boundary_[e.a] = 1;
    mesh.boundary_[e.b] = 1;
  }

  std::uint64_t h = 1469598103934665603ull ^ f.family_id();
  for (int leaf : mesh.leaves_) {
    h ^= static_cast<std::uint64_t>(leaf);
    h *= 1099511628211ull;
  }
  mesh.hash_ = h;
  return mesh;
}

int Mesh::local_vertex(int global) const {
  auto it = local_vertex_.find(global);
  return it == local_vertex_.end() ? -1 : it->second;
}

std::vector<int> Mesh::generation() const {
  std::vector<int> g(leaves_.size());
  for (std::size_t t = 0; t < leaves_.size(); ++t) g[t] = forest_->node(leaves_[t]).level;
  return g;
}

Triangle Mesh::triangle(int t) const {
  const auto& v = triangles_[t];
  return {vertices_[v[0]], vertices_[v[1]], vertices_[v[2]]};
}

double Mesh::min_angle() const {
  double best = 10.0;
  for (int t = 0; t < num_triangles(); ++t) best = std::min(best, goafem::min_angle(triangle(t)));
  return best;
}

double Mesh::area() const {
  double a = 0.0;
  for (int t = 0; t < num_triangles(); ++t) a += signed_area(triangle(t));
  return a;
}

// ---------------------------------------------------------------------------

std::string to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::unit_square: return "unit_square";
    case DomainKind::l_shaped: return "l_shaped";
    case DomainKind::slit: return "slit";
  }
  return "unknown";
}

namespace {

int exact_root(double v) {
  const int r = static_cast<int>(std::lround(std::sqrt(v)));
  return (r > 0 && static_cast<double>(r) * r == v) ? r : -1;
}

}  // namespace

Mesh initial_mesh(const DomainSpec& domain, int target_count) {
  // Structured grid of squares split along the anti-diagonal. Each triangle
  // is stored as (hypotenuse end, hypotenuse end, right-angle vertex).
  int cells = 0;  // cells per side of the bounding box
  double lo = 0.0;
  double hi = 1.0;
  switch (domain.kind) {
    case DomainKind::unit_square: {
      const int n = target_count % 2 == 0 ? exact_root(target_count / 2.0) : -1;
      if (n < 1) throw ConfigError("unit square needs 2 n^2 triangles, got " + std::to_string(target_count));
      cells = n;
      break;
    }
    case DomainKind::l_shaped: {
      const int n = target_count % 6 == 0 ? exact_root(target_count / 6.0) : -1;
      if (n < 1) throw ConfigError("L-shaped domain needs 6 n^2 triangles, got " + std::to_string(target_count));
      cells = 2 * n;
      lo = -1.0;
      break;
    }
    case DomainKind::slit: {
      const int n = target_count % 8 == 0 ? exact_root(target_count / 8.0) : -1;
      if (n < 1) throw ConfigError("slit domain needs 8 n^2 triangles, got " + std::to_string(target_count));
      if (!(domain.slit_width > 0.0 && domain.slit_width < 0.5)) throw ConfigError("slit width must lie in (0, 0.5)");
      cells = 2 * n;
      lo = -1.0;
      break;
    }
  }
  const int half = cells / 2;
  const double h = (hi - lo) / cells;
  auto cell_in_domain = [&](int i, int j) {
    return !(domain.kind == DomainKind::l_shaped && i < half && j < half);
  };

  // Vertex ids on demand; slit vertices get an upper and a lower copy.
  std::vector<Point> vertices;
  std::vector<int> id((cells + 1) * (cells + 1) * 2, -1);
  auto vertex = [&](int i, int j, bool upper_side) {
    const bool on_slit = domain.kind == DomainKind::slit && j == half && i < half;
    const int slot = ((j * (cells + 1)) + i) * 2 + ((on_slit && !upper_side) ? 1 : 0);
    if (id[slot] < 0) {
      Point p{lo + i * h, lo + j * h};
      if (on_slit) p.y = (upper_side ? -1.0 : 1.0) * domain.slit_width * p.x;
      id[slot] = static_cast<int>(vertices.size());
      vertices.push_back(p);
    }
    return id[slot];
  };

  std::vector<std::array<int, 3>> roots;
  for (int j = 0; j < cells; ++j) {
    for (int i = 0; i < cells; ++i) {
      if (!cell_in_domain(i, j)) continue;
      const bool upper = j >= half;
      const int ll = vertex(i, j, upper);
      const int lr = vertex(i + 1, j, upper);
      const int ul = vertex(i, j + 1, upper);
      const int ur = vertex(i + 1, j + 1, upper);
      roots.push_back({lr, ul, ll});
      roots.push_back({ul, lr, ur});
    }
  }
  auto forest = std::make_shared<Forest>(std::move(vertices), roots);
  std::vector<int> leaves(roots.size());
  for (std::size_t r = 0; r < roots.size(); ++r) leaves[r] = static_cast<int>(r);
  return Mesh::from_leaves(forest, std::move(leaves));
}

Mesh uniform_refine(const Mesh& mesh) {
  auto forest = mesh.forest_ptr();
  std::vector<int> leaves;
  leaves.reserve(4 * mesh.leaves().size());
  for (int leaf : mesh.leaves()) {
    const auto c = forest->bisect(leaf);
    const auto g0 = forest->bisect(c[0]);
    const auto g1 = forest->bisect(c[1]);
    leaves.insert(leaves.end(), {g0[0], g0[1], g1[0], g1[1]});
  }
  return Mesh::from_leaves(forest, std::move(leaves));
}

namespace {

int find_edge(const Mesh& mesh, int a, int b) {
  if (a > b) std::swap(a, b);
  const auto& edges = mesh.edges();
  auto it = std::lower_bound(edges.begin(), edges.end(), std::pair{a, b},
                             [](const Edge& e, const std::pair<int, int>& k) {
                               return e.a != k.first ? e.a < k.first : e.b < k.second;
                             });
  if (it == edges.end() || it->a != a || it->b != b) return -1;
  return static_cast<int>(it - edges.begin());
}

}  // namespace

Mesh refine_nvb(const Mesh& mesh, std::span<const NewVertex> marked) {
  if (marked.empty()) return mesh;
  const auto& edges = mesh.edges();
  const auto& te = mesh.triangle_edges();
  std::vector<char> mark(edges.size(), 0);
  std::vector<int> queue;
  for (const NewVertex& v : marked) {
    const int e = find_edge(mesh, v.a, v.b);
    if (e < 0 || edges[e].boundary()) {
      throw PreconditionError("marked vertex is not a new interior vertex of the mesh");
    }
    if (!mark[e]) {
      mark[e] = 1;
      for (int t : edges[e].tri) {
        if (t >= 0) queue.push_back(t);
      }
    }
  }
  // Closure: a triangle with any marked edge needs its refinement edge marked.
  while (!queue.empty()) {
    const int t = queue.back();
    queue.pop_back();
    const int ref = te[t][0];
    if (mark[ref]) continue;
    mark[ref] = 1;
    for (int s : edges[ref].tri) {
      if (s >= 0 && s != t) queue.push_back(s);
    }
  }
  auto forest = mesh.forest_ptr();
  std::vector<int> leaves;
  leaves.reserve(mesh.leaves().size() + 4 * marked.size());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const int leaf = mesh.leaves()[t];
    if (!mark[te[t][0]]) {
      leaves.push_back(leaf);
      continue;
    }
    const auto c = forest->bisect(leaf);
    // child 0 = (v2, v0, m) refines old edge (v2, v0); child 1 = (v1, v2, m) refines (v1, v2).
    if (mark[te[t][2]]) {
      const auto g = forest->bisect(c[0]);
      leaves.insert(leaves.end(), {g[0], g[1]});
    } else {
      leaves.push_back(c[0]);
    }
    if (mark[te[t][1]]) {
      const auto g = forest->bisect(c[1]);
      leaves.insert(leaves.end(), {g[0], g[1]});
    } else {
      leaves.push_back(c[1]);
    }
  }
  return Mesh::from_leaves(forest, std::move(leaves));
}

VertexSet new_interior_vertices(const Mesh& mesh) {
  VertexSet out;
  for (const Edge& e : mesh.edges()) {
    if (e.boundary()) continue;
    out.push_back({e.a, e.b, midpoint(mesh.vertices()[e.a], mesh.vertices()[e.b])});
  }
  return out;
}

int fine_vertex_index(const Mesh& coarse, const Mesh& fine, const NewVertex& v) {
  const int g = coarse.forest().find_midpoint(coarse.global_vertex(v.a), coarse.global_vertex(v.b));
  return g < 0 ? -1 : fine.local_vertex(g);
}

Eigen::SparseMatrix<double> prolongation(const Mesh& from, const Mesh& to) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(3 * to.num_vertices());
  std::vector<char> done(to.num_vertices(), 0);
  for_each_overlay_cell(from, to, [&](int node, int lf, int lt) {
    if (to.leaves()[lt] != node) throw StructuralError("target mesh does not refine the source mesh");
    const P1Shape shape(from.triangle(lf));
    const auto& fv = from.triangles()[lf];
    for (int k : to.triangles()[lt]) {
      if (done[k]) continue;
      done[k] = 1;
      const auto lam = shape.barycentric(to.vertices()[k]);
      for (int j = 0; j < 3; ++j) {
        if (std::abs(lam[j]) < 1e-13) continue;
        trip.emplace_back(k, fv[j], lam[j]);
      }
    }
  });
  Eigen::SparseMatrix<double> p(to.num_vertices(), from.num_vertices());
  p.setFromTriplets(trip.begin(), trip.end());
  return p;
}

Overlay common_refinement(const Mesh& a, const Mesh& b) {
  std::vector<int> cells;
  for_each_overlay_cell(a, b, [&](int node, int, int) { cells.push_back(node); });
  Mesh m = Mesh::from_leaves(a.forest_ptr(), std::move(cells));
  auto pa = prolongation(a, m);
  auto pb = prolongation(b, m);
  return {std::move(m), std::move(pa), std::move(pb)};
}

void write_mesh(std::ostream& os, const Mesh& mesh) {
  os << mesh.num_vertices() << ' ' << mesh.num_triangles() << '\n';
  char buf[96];
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const Point p = mesh.vertices()[v];
    std::snprintf(buf, sizeof buf, "%.17g %.17g %d\n", p.x, p.y, mesh.boundary()[v] ? 1 : 0);
    os << buf;
  }
  for (const auto& t : mesh.triangles()) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

}  // namespace goafem
