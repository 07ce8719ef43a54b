// Desk-scale acceptance run. One PASS/FAIL line per criterion; the exit code
// is nonzero when any criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>

#include "fixtures.hpp"
#include "goafem/adaptive.hpp"
#include "goafem/cli.hpp"
#include "oracles.hpp"

using namespace goafem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what + (detail.empty() ? "" : "; " + detail);
    pass = pass && ok;
  }
};

std::string format(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

// A desk run to `tol`, computed as the prefix of a run to `ref_tol` when a
// reference is requested (the loop is deterministic).
struct DeskRun {
  ConvergenceLog full;
  std::size_t prefix = 0;

  std::vector<IterationRecord> rows() const {
    return {full.rows.begin(), full.rows.begin() + static_cast<std::ptrdiff_t>(prefix)};
  }
};

DeskRun desk_run(int setup, double tol, double ref_tol = 0.0, int max_iter = 30) {
  AdaptiveOptions o;
  o.tol = ref_tol > 0.0 ? ref_tol : tol;
  o.max_iter = ref_tol > 0.0 ? 1000 : max_iter;
  DeskRun r;
  r.full = run(AdaptiveProblem::for_setup(setup), o);
  for (const auto& row : r.full.rows) {
    ++r.prefix;
    if (row.product < tol || row.iter >= max_iter) break;
  }
  return r;
}

double slope_of(const std::vector<IterationRecord>& rows) {
  std::vector<double> n, p;
  for (const auto& r : rows) {
    n.push_back(r.dofs);
    p.push_back(r.product);
  }
  return loglog_slope(n, p, 5);
}

Outcome rate_check(const DeskRun& d, double tol, double lo, double hi) {
  Outcome o;
  const auto rows = d.rows();
  const double s = slope_of(rows);
  o.detail = format("slope %.3f over the last 5 of %zu iterations, final product %.3e (tol %.0e)", s,
                    rows.size(), rows.back().product, tol);
  o.require(rows.size() >= 5, "fewer than 5 iterations");
  o.require(rows.back().product < tol, "tolerance not reached");
  o.require(s >= lo && s <= hi, format("slope outside [%.2f, %.2f]", lo, hi));
  return o;
}

Outcome upper_bound(const DeskRun& d) {
  Outcome o;
  const double g_ref = d.full.rows.back().goal_value;
  const auto rows = d.rows();
  double worst = 0.0;
  const std::size_t checked = rows.size() >= 2 ? rows.size() - 2 : 0;
  for (std::size_t i = 0; i < checked; ++i) {
    const double e = std::abs(g_ref - rows[i].goal_value);
    worst = std::max(worst, e / rows[i].product);
  }
  o.detail = format("max |g_ref - g_l| / product = %.3f over %zu iterations (reference dofs %d)", worst,
                    checked, d.full.rows.back().dofs);
  o.require(checked > 0, "no iterations to check");
  o.require(worst <= 10.0, "reference error exceeds 10 x product");
  return o;
}

Outcome estimator_equivalence() {
  Outcome o;
  AdaptiveOptions opts;
  opts.tol = 1e-12;
  AdaptiveLoop loop(AdaptiveProblem::for_setup(1), opts);
  double lo = 1e300, hi = 0.0;
  for (int it = 0; it <= 3; ++it) {
    const AdaptiveState& st = loop.solve_and_estimate();
    const MultilevelStructure& s = st.structure;
    const MultilevelStructure e = enriched_structure(s);
    const AdaptiveProblem& p = loop.problem();
    OperatorAssembler asmb(p.coeff);
    FactorCache cache;
    const BlockOperator op = asmb.build(e);

    MlFunction fp, fd;
    const LoadFn load = primal_load(p.rhs);
    for (int k = 0; k < e.size(); ++k) {
      fp.blocks.push_back(load(e.index(k), e.space(k)));
      // The dual problem of the current step has load g'(u) with u fixed.
      fd.blocks.push_back(p.goal.derivative_block(s, st.u, e.index(k), e.space(k)));
    }
    const MlFunction uh = solve(op, e, fp, cache).first;
    const MlFunction zh = solve(op, e, fd, cache).first;
    const MlFunction du = uh - embed(st.u, s, e);
    const MlFunction dz = zh - embed(st.z, s, e);
    const double ru = st.mu.total / std::sqrt(op.form(du, du));
    const double rz = st.zeta.total / std::sqrt(op.form(dz, dz));
    lo = std::min({lo, ru, rz});
    hi = std::max({hi, ru, rz});
    loop.mark_and_refine();
  }
  o.detail = format("tau / ||w_hat - w||_B in [%.3f, %.3f] for primal and dual, iterations 0-3", lo, hi);
  o.require(lo >= 0.1 && hi <= 10.0, "ratio outside [0.1, 10]");
  return o;
}

std::vector<Triangle> triangles_of(const Mesh& m) {
  std::vector<Triangle> t;
  for (int i = 0; i < m.num_triangles(); ++i) t.push_back(m.triangle(i));
  return t;
}

Outcome deterministic_reduction() {
  Outcome o;
  AdaptiveOptions opts;
  opts.tol = 1e-12;
  opts.parametric_enrichment = false;
  AdaptiveLoop loop(AdaptiveProblem::for_setup(1), opts);
  double du = 0.0, dz = 0.0, dind = 0.0;
  int meshes = 0;
  for (int it = 0; it < 3; ++it) {
    const AdaptiveState& st = loop.solve_and_estimate();
    const MultilevelStructure& s = st.structure;
    if (s.size() != 1) {
      o.require(false, "index set grew");
      break;
    }
    const Mesh& m = s.mesh(0);
    const oracle::DeterministicStep ref =
        oracle::deterministic_step(m.vertices(), m.triangles(), m.boundary(),
                                   {5.0 / 8, 7.0 / 8, 9.0 / 16, 13.0 / 16}, opts.theta);
    const Vector u = s.space(0).to_vertex_values(st.u.blocks[0]);
    const Vector z = s.space(0).to_vertex_values(st.z.blocks[0]);
    du = std::max(du, (u - ref.u).cwiseAbs().maxCoeff());
    dz = std::max(dz, (z - ref.z).cwiseAbs().maxCoeff());

    o.require(st.mu.spatial.size() == ref.edges.size(), "indicator count differs");
    if (st.mu.spatial.size() != ref.edges.size()) break;
    for (std::size_t i = 0; i < ref.edges.size(); ++i) {
      const auto& a = st.mu.spatial[i];
      o.require(a.vertex.a == ref.edges[i].first && a.vertex.b == ref.edges[i].second, "edge order differs");
      dind = std::max({dind, std::abs(a.value - ref.mu[i]), std::abs(st.zeta.spatial[i].value - ref.zeta[i])});
    }

    const MarkingDecision d = loop.mark_and_refine();
    o.require(d.primal == ref.primal, format("marking choice differs at iteration %d", it));
    std::vector<std::pair<int, int>> marked;
    std::vector<Point> points;
    for (const auto& v : d.marks.vertices[0]) {
      marked.emplace_back(v.a, v.b);
      points.push_back(v.x);
    }
    std::sort(marked.begin(), marked.end());
    o.require(marked == ref.marked, format("marked set differs at iteration %d", it));
    const auto next = oracle::closure(triangles_of(m), points);
    o.require(oracle::triangle_set(next) == oracle::triangle_set(loop.state().structure.mesh(0)),
              format("refined mesh differs at iteration %d", it));
    ++meshes;
  }
  o.detail = format("%d meshes: max |u - u_ref| %.1e, |z - z_ref| %.1e, indicators %.1e", meshes, du, dz, dind);
  o.require(du <= 1e-9 && dz <= 1e-9, "solution mismatch above 1e-9");
  o.require(dind <= 1e-8, "indicator mismatch above 1e-8");
  return o;
}

std::vector<int> dense_of(const MultiIndex& nu) {
  std::vector<int> d(nu.max_param(), 0);
  for (const auto& [m, v] : nu.entries()) d[m - 1] = v;
  return d;
}

Outcome parametric_algebra() {
  Outcome o;
  std::mt19937_64 rng(2024);
  int sets = 0;
  for (int rep = 0; rep < 20; ++rep) {
    IndexSet p;
    std::uniform_int_distribution<int> size(0, 7);
    const int n = size(rng);
    for (int i = 0; i < n; ++i) {
      const auto q = detail_set(p);
      std::uniform_int_distribution<std::size_t> pick(0, q.size() - 1);
      p = p.merged({q[pick(rng)]});
    }
    std::vector<std::vector<int>> dense;
    for (const auto& nu : p) dense.push_back(dense_of(nu));
    std::set<std::vector<int>> got;
    for (const auto& mu : detail_set(p)) got.insert(dense_of(mu));
    o.require(p.size() <= 8, "index set too large");
    o.require(got == oracle::detail_set(dense), format("detail set %d differs", rep));
    ++sets;
  }

  std::vector<double> x, w;
  oracle::gauss_legendre(64, x, w);
  auto moment = [&](int a, int n, int k) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      s += 0.5 * w[i] * std::pow(x[i], a) * oracle::legendre_orthonormal(n, x[i]) *
           oracle::legendre_orthonormal(k, x[i]);
    }
    return s;
  };
  double ortho = 0.0, lib_ortho = 0.0, coupling = 0.0;
  for (int n = 0; n <= 8; ++n) {
    for (int k = 0; k <= 8; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) s += 0.5 * w[i] * legendre_eval(n, x[i]) * legendre_eval(k, x[i]);
      lib_ortho = std::max(lib_ortho, std::abs(s - (n == k)));
      ortho = std::max(ortho, std::abs(moment(0, n, k) - (n == k)));
    }
  }
  std::uniform_int_distribution<int> deg(0, 3);
  for (int rep = 0; rep < 300; ++rep) {
    std::vector<int> a(3), b(3);
    for (auto& v : a) v = deg(rng);
    b = a;
    std::uniform_int_distribution<int> which(0, 2);
    b[which(rng)] += rep % 3 == 0 ? 0 : 1;
    if (rep % 5 == 0) b = {deg(rng), deg(rng), deg(rng)};
    const MultiIndex nu = MultiIndex::from_dense(a), mu = MultiIndex::from_dense(b);
    const Coupling c = coupling_weight(nu, mu);
    for (int m = 1; m <= 3; ++m) {
      double t = 1.0;
      for (int k = 1; k <= 3; ++k) t *= moment(k == m ? 1 : 0, a[k - 1], b[k - 1]);
      const double got = c.kind == Coupling::Kind::offdiag && c.m == m ? c.weight : 0.0;
      coupling = std::max(coupling, std::abs(got - t));
    }
  }
  o.detail = format("%d detail sets match; coupling error %.1e; orthonormality error %.1e", sets, coupling,
                    std::max(ortho, lib_ortho));
  o.require(coupling <= 1e-12, "coupling weights off");
  o.require(lib_ortho <= 1e-12, "orthonormality off");
  return o;
}

Outcome goal_derivatives() {
  Outcome o;
  std::mt19937_64 rng(77);
  double worst = 0.0;
  for (int setup = 1; setup <= 4; ++setup) {
    const AdaptiveProblem p = AdaptiveProblem::for_setup(setup);
    for (int rep = 0; rep < 3; ++rep) {
      const MultilevelStructure s = fixtures::random_structure(p.t0, rng, 2 + rep, 2);
      const MlFunction u = fixtures::random_function(s, rng);
      const MlFunction v = fixtures::random_function(s, rng);
      for (double eps : {1.0, 1e-2}) {
        const double fd = (p.goal.value(s, u + eps * v) - p.goal.value(s, u - eps * v)) / (2 * eps);
        const double d = p.goal.derivative_load(s, u).dot(v);
        const double scale = std::abs(d) + std::abs(p.goal.value(s, u)) + std::abs(p.goal.value(s, v));
        worst = std::max(worst, std::abs(fd - d) / scale);
      }
    }
  }
  o.detail = format("max relative central-difference error %.1e over all four goals", worst);
  o.require(worst <= 1e-9, "derivative mismatch");
  return o;
}

Outcome marking_minimality() {
  Outcome o;
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> len(1, 12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int lists = 0;
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> v(len(rng));
    for (auto& x : v) x = rep % 4 == 0 ? std::floor(4 * u(rng)) : u(rng) * u(rng);
    std::vector<MarkItem> items;
    for (std::size_t i = 0; i < v.size(); ++i) {
      MarkItem it;
      it.block = 0;
      it.vertex = {static_cast<int>(i), static_cast<int>(i) + 1, {}};
      it.value_sq = v[i];
      items.push_back(it);
    }
    for (double theta : {0.3, 0.5, 0.9, 1.0}) {
      const auto idx = doerfler_minimal(items, theta);
      o.require(idx.size() == oracle::exhaustive_min_cardinality(v, theta),
                format("list %d theta %.1f not minimal", rep, theta));
    }
    ++lists;
  }
  // Equal cardinalities choose the primal marking.
  IndicatorBundle mu, zeta;
  for (int i = 0; i < 4; ++i) {
    mu.spatial.push_back({0, NewVertex{i, i + 1, {}}, i == 0 ? 3.0 : 1.0});
    zeta.spatial.push_back({0, NewVertex{i, i + 1, {}}, i == 0 ? 3.0 : 1.0});
  }
  const MarkingDecision tie = decide_marking(mu, zeta, 0.5, 1);
  o.require(tie.primal && tie.primal_count == tie.combined_count, "tie does not pick primal");
  for (auto& z : zeta.spatial) z.value = z.vertex.a == 3 ? 20.0 : 0.0;
  for (auto& m : mu.spatial) m.value = 1.0;
  const MarkingDecision comb = decide_marking(mu, zeta, 0.5, 1);
  o.require(!comb.primal && comb.combined_count < comb.primal_count, "smaller combined set not chosen");
  o.detail = format("%d random lists x 4 theta values minimal; primal chosen on ties", lists);
  return o;
}

Outcome structural_invariants() {
  Outcome o;
  std::mt19937_64 rng(5);
  const MeshPtr t0 = AdaptiveProblem::for_setup(1).t0;
  const GoalFunctional goal = GoalFunctional::for_setup(1);
  double res = 0.0, asym = 0.0, lo = 1e300, hi = 0.0, pyth = 0.0, emb = 0.0;
  for (int rep = 0; rep < 4; ++rep) {
    const MultilevelStructure s = fixtures::random_structure(t0, rng, 2 + rep, 2);
    const MultilevelStructure e1 = enriched_structure(s);
    const MultilevelStructure e2 = enriched_structure(e1);
    OperatorAssembler asmb;
    FactorCache cache;
    auto galerkin = [&](const MultilevelStructure& x) {
      MlFunction f = MlFunction::zeros(x);
      f.blocks[0] = load_constant_one(x.space(0));
      const BlockOperator op = asmb.build(x);
      MlFunction u = solve(op, x, f, cache).first;
      res = std::max(res, galerkin_residual_check(op, u, f));
      return u;
    };
    const MlFunction u2 = galerkin(e2);
    const MlFunction u1 = embed(galerkin(e1), e1, e2);
    const MlFunction u0s = galerkin(s);
    const MlFunction u0 = embed(u0s, s, e2);
    const BlockOperator b = asmb.build(e2);
    auto sq = [&](const MlFunction& v) { return b.form(v, v); };
    const double l = sq(u2 - u0);
    pyth = std::max(pyth, std::abs(l - sq(u2 - u1) - sq(u1 - u0)) / l);

    const BlockOperator bs = asmb.build(s);
    for (int k = 0; k < 5; ++k) {
      const MlFunction x = fixtures::random_function(s, rng);
      const MlFunction y = fixtures::random_function(s, rng);
      asym = std::max(asym, std::abs(bs.form(x, y) - bs.form(y, x)) / std::sqrt(bs.form(x, x) * bs.form(y, y)));
      const double r = bs.form(x, x) / x.dot(bs.apply_mean(x));
      lo = std::min(lo, r);
      hi = std::max(hi, r);
      const MlFunction xe = embed(x, s, e2), ye = embed(y, s, e2);
      emb = std::max(emb, std::abs(b.form(xe, ye) - bs.form(x, y)) / std::sqrt(bs.form(x, x) * bs.form(y, y)));
      emb = std::max(emb, std::abs(goal.value(e2, xe) - goal.value(s, x)) / std::abs(goal.value(s, x)));
    }
  }
  const CoefficientField a;
  o.detail = format("residual %.1e, asymmetry %.1e, B/B0 in [%.3f, %.3f], Pythagoras %.1e, embedding %.1e", res,
                    asym, lo, hi, pyth, emb);
  o.require(res <= 1e-10, "Galerkin residual above 1e-10");
  o.require(asym <= 1e-12, "operator not symmetric");
  o.require(lo >= a.lambda() && hi <= a.Lambda(), "spectral bounds violated");
  o.require(std::abs(a.lambda() - 0.1) < 1e-12 && std::abs(a.Lambda() - 1.9) < 1e-12, "lambda, Lambda");
  o.require(pyth <= 1e-6, "Pythagoras off");
  o.require(emb <= 1e-11, "embedding changes the form or the goal");
  return o;
}

Outcome product_decay(const std::vector<std::pair<int, std::vector<IterationRecord>>>& runs) {
  Outcome o;
  std::string parts;
  for (const auto& [setup, rows] : runs) {
    const double ratio = rows.back().product / rows.front().product;
    parts += format("%ssetup %d: %.3e -> %.3e (ratio %.3f)", parts.empty() ? "" : ", ", setup,
                    rows.front().product, rows.back().product, ratio);
    o.require(ratio <= 0.1, format("setup %d ratio above 0.1", setup));
  }
  o.detail = parts + (o.pass ? "" : "; " + o.detail);
  return o;
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  };

  const double tol1 = desk_tolerance(1), tol2 = desk_tolerance(2);
  const DeskRun s1 = desk_run(1, tol1, tol1 / 10);
  const DeskRun s2 = desk_run(2, tol2);
  report(1, "rate, setup 1", [&] { return rate_check(s1, tol1, -1.25, -0.75); });
  report(2, "rate, setup 2", [&] { return rate_check(s2, tol2, -1.3, -0.7); });
  report(3, "reference error below 10 x estimate, setup 1", [&] { return upper_bound(s1); });
  report(4, "estimator equivalence, setup 1", estimator_equivalence);
  report(5, "deterministic reduction", deterministic_reduction);
  report(6, "parametric algebra", parametric_algebra);
  report(7, "goal derivatives", goal_derivatives);
  report(8, "marking minimality", marking_minimality);
  report(9, "structural invariants", structural_invariants);
  report(10, "estimator product decay", [&] {
    return product_decay({{1, s1.rows()},
                          {2, s2.rows()},
                          {3, desk_run(3, desk_tolerance(3)).rows()},
                          {4, desk_run(4, desk_tolerance(4)).rows()}});
  });
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
