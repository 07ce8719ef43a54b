#include "oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>

#include <Eigen/Cholesky>

namespace oracle {

namespace {

std::array<double, 6> canonical(const Triangle& t) {
  std::array<std::pair<double, double>, 3> p{{{t[0].x, t[0].y}, {t[1].x, t[1].y}, {t[2].x, t[2].y}}};
  std::sort(p.begin(), p.end());
  return {p[0].first, p[0].second, p[1].first, p[1].second, p[2].first, p[2].second};
}

// Strictly inside the open segment (a, b).
bool inside_edge(Point p, Point a, Point b) {
  const Point d = b - a;
  const double len2 = goafem::dot(d, d);
  if (std::abs(goafem::cross(d, p - a)) > 1e-12 * len2) return false;
  const double s = goafem::dot(p - a, d) / len2;
  return s > 1e-12 && s < 1.0 - 1e-12;
}

// Gauss-Legendre on [0, 1] by Newton iteration on the Legendre polynomial.
void gauss01(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = 0.5 * (1.0 - z);
    w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
  }
}

}  // namespace

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  gauss01(n, x, w);
  for (int i = 0; i < n; ++i) {
    x[i] = 2.0 * x[i] - 1.0;
    w[i] *= 2.0;
  }
}

double legendre_orthonormal(int n, double y) {
  double p0 = 1.0, p1 = y;
  if (n == 0) return 1.0;
  for (int k = 1; k < n; ++k) {
    const double p2 = ((2.0 * k + 1.0) * y * p1 - k * p0) / (k + 1.0);
    p0 = p1;
    p1 = p2;
  }
  return std::sqrt(2.0 * n + 1.0) * p1;
}

std::set<std::array<double, 6>> triangle_set(const std::vector<Triangle>& tris) {
  std::set<std::array<double, 6>> out;
  for (const auto& t : tris) out.insert(canonical(t));
  return out;
}

std::set<std::array<double, 6>> triangle_set(const goafem::Mesh& mesh) {
  std::vector<Triangle> tris;
  for (int t = 0; t < mesh.num_triangles(); ++t) tris.push_back(mesh.triangle(t));
  return triangle_set(tris);
}

std::vector<Triangle> closure(std::vector<Triangle> tris, const std::vector<Point>& marks) {
  for (bool changed = true; changed;) {
    changed = false;
    std::vector<Point> pts = marks;
    for (const auto& t : tris) pts.insert(pts.end(), t.begin(), t.end());
    std::vector<Triangle> next;
    for (const auto& t : tris) {
      bool split = false;
      for (int e = 0; e < 3 && !split; ++e) {
        for (const Point& p : pts) {
          if (inside_edge(p, t[e], t[(e + 1) % 3])) {
            split = true;
            break;
          }
        }
      }
      if (!split) {
        next.push_back(t);
        continue;
      }
      const Point m = goafem::midpoint(t[0], t[1]);
      next.push_back({t[2], t[0], m});
      next.push_back({t[1], t[2], m});
      changed = true;
    }
    tris = std::move(next);
  }
  return tris;
}

std::size_t exhaustive_min_cardinality(const std::vector<double>& values, double theta) {
  const std::size_t n = values.size();
  const double total = std::accumulate(values.begin(), values.end(), 0.0);
  if (total == 0.0) return 0;
  std::size_t best = n;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    const std::size_t c = static_cast<std::size_t>(std::popcount(mask));
    if (c >= best) continue;
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) s += values[i];
    }
    // Relative slack so that a subset equal to theta * total up to roundoff counts.
    if (s >= theta * total * (1.0 - 1e-14)) best = c;
  }
  return best;
}

std::set<std::vector<int>> detail_set(const std::vector<std::vector<int>>& p) {
  std::size_t len = 0;
  for (const auto& nu : p) len = std::max(len, nu.size());
  auto pad = [&](std::vector<int> v, std::size_t n) {
    v.resize(n, 0);
    return v;
  };
  std::vector<int> hi(len + 1, 0);
  int active = 0;
  for (std::size_t m = 0; m < len; ++m) {
    bool used = false;
    for (const auto& nu : p) {
      if (m < nu.size() && nu[m] > 0) used = true;
      if (m < nu.size()) hi[m] = std::max(hi[m], nu[m]);
    }
    active += used;
  }
  const std::size_t dim = std::max<std::size_t>(len, active + 1);
  hi.resize(dim, 0);
  std::set<std::vector<int>> pset;
  for (const auto& nu : p) pset.insert(pad(nu, dim));

  std::set<std::vector<int>> out;
  std::vector<int> mu(dim, 0);
  // Odometer over the box prod [0, hi_m + 1].
  while (true) {
    if (!pset.count(mu)) {
      bool hit = false;
      for (const auto& nu : pset) {
        int diff = 0, where = -1;
        for (std::size_t m = 0; m < dim; ++m) {
          const int d = std::abs(mu[m] - nu[m]);
          diff += d;
          if (d) where = static_cast<int>(m);
        }
        if (diff == 1 && where + 1 <= active + 1) hit = true;
      }
      if (hit) {
        std::vector<int> trimmed = mu;
        while (!trimmed.empty() && trimmed.back() == 0) trimmed.pop_back();
        out.insert(trimmed);
      }
    }
    std::size_t m = 0;
    while (m < dim && ++mu[m] > hi[m] + 1) mu[m++] = 0;
    if (m == dim) break;
  }
  return out;
}

double integrate(const Triangle& t, const std::function<double(Point)>& f, int n) {
  std::vector<double> x, w;
  gauss01(n, x, w);
  const double jac = 2.0 * std::abs(goafem::signed_area(t));
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      // (s, r) in the unit square -> (s, (1 - s) r) in the reference triangle.
      const double a = x[i], b = (1.0 - x[i]) * x[j];
      const Point p = t[0] + a * (t[1] - t[0]) + b * (t[2] - t[0]);
      sum += w[i] * w[j] * (1.0 - x[i]) * f(p);
    }
  }
  return jac * sum;
}

// ---------------------------------------------------------------------------

namespace {

struct P1 {
  double area;
  std::array<Point, 3> g;
};

P1 p1(const std::array<Point, 3>& v) {
  const double det = goafem::cross(v[1] - v[0], v[2] - v[0]);
  P1 s{0.5 * std::abs(det), {}};
  for (int i = 0; i < 3; ++i) {
    const Point a = v[(i + 1) % 3], b = v[(i + 2) % 3];
    // grad lambda_i is perpendicular to the opposite edge.
    s.g[i] = {(a.y - b.y) / det, (b.x - a.x) / det};
  }
  return s;
}

std::vector<int> minimal_set(const std::vector<double>& v, double theta) {
  std::vector<int> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return v[a] > v[b]; });
  double total = 0.0;
  for (int i : order) total += v[i];
  std::vector<int> out;
  if (total == 0.0) return out;
  double acc = 0.0;
  for (int i : order) {
    if (acc >= theta * total) break;
    acc += v[i];
    out.push_back(i);
  }
  return out;
}

}  // namespace

DeterministicStep deterministic_step(const std::vector<Point>& x,
                                     const std::vector<std::array<int, 3>>& tri,
                                     const std::vector<char>& boundary, std::array<double, 4> s_box,
                                     double theta) {
  const int nv = static_cast<int>(x.size());
  std::vector<int> dof(nv, -1);
  int n = 0;
  for (int v = 0; v < nv; ++v) {
    if (!boundary[v]) dof[v] = n++;
  }
  const double s_area = (s_box[1] - s_box[0]) * (s_box[3] - s_box[2]);
  auto in_s = [&](Point c) {
    return c.x > s_box[0] && c.x < s_box[1] && c.y > s_box[2] && c.y < s_box[3];
  };

  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd ms = Eigen::MatrixXd::Zero(nv, nv);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
  for (const auto& t : tri) {
    const std::array<Point, 3> p{x[t[0]], x[t[1]], x[t[2]]};
    const P1 s = p1(p);
    const Point c = (1.0 / 3.0) * (p[0] + p[1] + p[2]);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        if (in_s(c)) ms(t[i], t[j]) += s.area / 12.0 * (i == j ? 2.0 : 1.0);
        if (dof[t[i]] >= 0 && dof[t[j]] >= 0) {
          k(dof[t[i]], dof[t[j]]) += s.area * goafem::dot(s.g[i], s.g[j]);
        }
      }
      if (dof[t[i]] >= 0) f[dof[t[i]]] += s.area / 3.0;
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  const Eigen::VectorXd ui = llt.solve(f);
  DeterministicStep out;
  out.u = Eigen::VectorXd::Zero(nv);
  for (int v = 0; v < nv; ++v) {
    if (dof[v] >= 0) out.u[v] = ui[dof[v]];
  }
  const Eigen::VectorXd gfull = (2.0 / s_area) * (ms * out.u);
  Eigen::VectorXd g(n);
  for (int v = 0; v < nv; ++v) {
    if (dof[v] >= 0) g[dof[v]] = gfull[v];
  }
  const Eigen::VectorXd zi = llt.solve(g);
  out.z = Eigen::VectorXd::Zero(nv);
  for (int v = 0; v < nv; ++v) {
    if (dof[v] >= 0) out.z[v] = zi[dof[v]];
  }

  // Uniform refinement by three bisections per element.
  std::map<std::pair<int, int>, int> mid;
  std::vector<Point> fx = x;
  std::vector<double> fu(out.u.data(), out.u.data() + nv), fz(out.z.data(), out.z.data() + nv);
  auto midpoint = [&](int a, int b) {
    const auto key = std::minmax(a, b);
    auto it = mid.find(key);
    if (it != mid.end()) return it->second;
    const int id = static_cast<int>(fx.size());
    fx.push_back(goafem::midpoint(x[a], x[b]));
    fu.push_back(0.5 * (out.u[a] + out.u[b]));
    fz.push_back(0.5 * (out.z[a] + out.z[b]));
    mid.emplace(key, id);
    return id;
  };
  std::vector<std::array<int, 3>> fine;
  for (const auto& t : tri) {
    const int m01 = midpoint(t[0], t[1]), m12 = midpoint(t[1], t[2]), m20 = midpoint(t[2], t[0]);
    fine.push_back({m01, t[2], m20});
    fine.push_back({t[0], m01, m20});
    fine.push_back({m01, t[1], m12});
    fine.push_back({t[2], m01, m12});
  }
  const int nf = static_cast<int>(fx.size());
  std::vector<double> ru(nf, 0.0), rz(nf, 0.0), diag(nf, 0.0);
  for (const auto& t : fine) {
    const std::array<Point, 3> p{fx[t[0]], fx[t[1]], fx[t[2]]};
    const P1 s = p1(p);
    const Point c = (1.0 / 3.0) * (p[0] + p[1] + p[2]);
    Point gu{}, gz{};
    for (int i = 0; i < 3; ++i) {
      gu = gu + fu[t[i]] * s.g[i];
      gz = gz + fz[t[i]] * s.g[i];
    }
    for (int i = 0; i < 3; ++i) {
      ru[t[i]] += s.area / 3.0 - s.area * goafem::dot(gu, s.g[i]);
      double mu = 0.0;
      if (in_s(c)) {
        for (int j = 0; j < 3; ++j) mu += s.area / 12.0 * (i == j ? 2.0 : 1.0) * fu[t[j]];
      }
      rz[t[i]] += 2.0 / s_area * mu - s.area * goafem::dot(gz, s.g[i]);
      diag[t[i]] += s.area * goafem::dot(s.g[i], s.g[i]);
    }
  }
  for (const auto& [key, id] : mid) {
    if (boundary[key.first] && boundary[key.second]) {
      // A boundary edge has both endpoints on the boundary; interior edges with
      // two boundary endpoints are recognized by having two adjacent elements.
      int adjacent = 0;
      for (const auto& t : tri) {
        int hits = 0;
        for (int v : t) hits += (v == key.first || v == key.second);
        adjacent += hits == 2;
      }
      if (adjacent < 2) continue;
    }
    out.edges.push_back(key);
    out.mu.push_back(std::abs(ru[id]) / std::sqrt(diag[id]));
    out.zeta.push_back(std::abs(rz[id]) / std::sqrt(diag[id]));
  }

  std::vector<double> p2(out.mu.size()), c2(out.mu.size());
  for (std::size_t i = 0; i < p2.size(); ++i) {
    p2[i] = out.mu[i] * out.mu[i];
    c2[i] = p2[i] + out.zeta[i] * out.zeta[i];
  }
  const auto mp = minimal_set(p2, theta);
  const auto mc = minimal_set(c2, theta);
  out.primal = mp.size() <= mc.size();
  for (int i : out.primal ? mp : mc) out.marked.push_back(out.edges[i]);
  std::sort(out.marked.begin(), out.marked.end());
  return out;
}

}  // namespace oracle
