#include "goafem/adaptive.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <tuple>

namespace goafem {

namespace {

bool canonical_less(const MarkItem& a, const MarkItem& b) {
  if (a.kind != b.kind) return a.kind == MarkItem::Kind::spatial;
  if (a.kind == MarkItem::Kind::spatial) {
    return std::tie(a.block, a.vertex.a, a.vertex.b) < std::tie(b.block, b.vertex.a, b.vertex.b);
  }
  return a.index < b.index;
}

}  // namespace

std::vector<int> doerfler_minimal(std::span<const MarkItem> items, double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw PreconditionError("theta must lie in (0, 1]");
  std::vector<int> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    if (items[i].value_sq != items[j].value_sq) return items[i].value_sq > items[j].value_sq;
    return canonical_less(items[i], items[j]);
  });
  double total = 0.0;
  for (int i : order) {
    if (items[i].value_sq < 0.0) throw PreconditionError("squared indicators must be nonnegative");
    total += items[i].value_sq;
  }
  std::vector<int> chosen;
  if (total == 0.0) return chosen;
  const double goal = theta * total;
  double acc = 0.0;
  for (int i : order) {
    if (acc >= goal) break;
    chosen.push_back(i);
    acc += items[i].value_sq;
  }
  return chosen;
}

std::vector<MarkItem> mark_items(const IndicatorBundle& a, const IndicatorBundle* b) {
  std::vector<MarkItem> items;
  items.reserve(a.spatial.size() + a.parametric.size());
  for (std::size_t i = 0; i < a.spatial.size(); ++i) {
    const auto& s = a.spatial[i];
    double v = s.value * s.value;
    if (b) v += b->spatial[i].value * b->spatial[i].value;
    items.push_back({MarkItem::Kind::spatial, s.block, s.vertex, {}, v});
  }
  for (std::size_t i = 0; i < a.parametric.size(); ++i) {
    const auto& p = a.parametric[i];
    double v = p.value * p.value;
    if (b) v += b->parametric[i].value * b->parametric[i].value;
    items.push_back({MarkItem::Kind::parametric, -1, {}, p.index, v});
  }
  return items;
}

namespace {

MultilevelMarks marks_from(std::span<const MarkItem> items, const std::vector<int>& chosen,
                           int num_blocks) {
  MultilevelMarks m;
  m.vertices.resize(num_blocks);
  for (int i : chosen) {
    const auto& it = items[i];
    if (it.kind == MarkItem::Kind::spatial) {
      m.vertices[it.block].push_back(it.vertex);
    } else {
      m.indices.push_back(it.index);
    }
  }
  return m;
}

}  // namespace

MarkingDecision decide_marking(const IndicatorBundle& mu, const IndicatorBundle& zeta, double theta,
                               int num_blocks) {
  const auto primal_items = mark_items(mu);
  const auto combined_items = mark_items(mu, &zeta);
  const auto primal = doerfler_minimal(primal_items, theta);
  const auto combined = doerfler_minimal(combined_items, theta);
  MarkingDecision d;
  d.primal_count = primal.size();
  d.combined_count = combined.size();
  d.primal = primal.size() <= combined.size();
  d.marks = d.primal ? marks_from(primal_items, primal, num_blocks)
                     : marks_from(combined_items, combined, num_blocks);
  return d;
}

AdaptiveProblem AdaptiveProblem::for_setup(int setup) {
  const ProblemSpec spec = problem_for_setup(setup);
  auto t0 = std::make_shared<const Mesh>(initial_mesh(spec.domain, spec.initial_triangles));
  return {t0, spec.coefficient, spec.rhs, GoalFunctional::for_setup(setup)};
}

AdaptiveLoop::AdaptiveLoop(AdaptiveProblem problem, AdaptiveOptions options)
    : problem_(std::move(problem)),
      options_(options),
      assembler_(problem_.coeff),
      state_{0, MultilevelStructure(problem_.t0), {}, {}, {}, {}, 0.0, 0.0, {}, {}} {
  if (!(options_.theta > 0.0 && options_.theta <= 1.0)) throw ConfigError("theta must lie in (0, 1]");
}

const AdaptiveState& AdaptiveLoop::solve_and_estimate() {
  const MultilevelStructure& s = state_.structure;
  const BlockOperator op = assembler_.build(s);

  // Primal solve.
  MlFunction rhs;
  const LoadFn load = primal_load(problem_.rhs);
  for (int k = 0; k < s.size(); ++k) rhs.blocks.push_back(load(s.index(k), s.space(k)));
  std::tie(state_.u, state_.primal_report) = solve(op, s, rhs, factors_, options_.solver);

  // Dual solve at the new primal solution.
  const MlFunction dual_rhs = problem_.goal.derivative_load(s, state_.u);
  std::tie(state_.z, state_.dual_report) = solve(op, s, dual_rhs, factors_, options_.solver);

  const ResidualFunctional rp = primal_residual(s, state_.u, problem_.rhs, problem_.coeff);
  const ResidualFunctional rd = dual_residual(s, problem_.goal, state_.u, state_.z, problem_.coeff);
  const ResidualFunctional* list[] = {&rp, &rd};
  auto bundles = estimate_bundles(s, list, factors_, options_.parametric_enrichment);
  state_.mu = std::move(bundles[0]);
  state_.zeta = std::move(bundles[1]);
  const double m = state_.mu.total;
  const double zt = state_.zeta.total;
  state_.product = m * std::sqrt(m * m + zt * zt);
  state_.goal_value = problem_.goal.value(s, state_.u);
  estimated_ = true;
  return state_;
}

MarkingDecision AdaptiveLoop::mark_and_refine() {
  if (!estimated_) solve_and_estimate();
  MarkingDecision d =
      decide_marking(state_.mu, state_.zeta, options_.theta, state_.structure.size());
  state_.structure = refine_structure(state_.structure, d.marks);
  ++state_.iteration;
  estimated_ = false;

  std::vector<const Mesh*> keep{problem_.t0.get()};
  for (int k = 0; k < state_.structure.size(); ++k) keep.push_back(&state_.structure.mesh(k));
  factors_.retain(keep);
  return d;
}

MarkingDecision AdaptiveLoop::step() {
  solve_and_estimate();
  return mark_and_refine();
}

ConvergenceLog run(const AdaptiveProblem& problem, const AdaptiveOptions& options,
                   const IterationObserver& observer) {
  if (!(options.tol > 0.0)) throw ConfigError("tol must be positive");
  if (options.max_iter < 0) throw ConfigError("max_iter must be nonnegative");
  const auto start = std::chrono::steady_clock::now();
  AdaptiveLoop loop(problem, options);
  ConvergenceLog log;
  while (true) {
    const AdaptiveState& st = loop.solve_and_estimate();
    IterationRecord rec;
    rec.iter = st.iteration;
    rec.dofs = st.structure.dim();
    rec.mu = st.mu.total;
    rec.zeta = st.zeta.total;
    rec.product = st.product;
    rec.goal_value = st.goal_value;
    rec.n_indices = st.structure.size();
    rec.max_param = st.structure.indices().max_param();
    rec.primal_iterations = st.primal_report.iterations;
    rec.dual_iterations = st.dual_report.iterations;
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool done = st.product < options.tol;
    const bool capped = st.iteration >= options.max_iter;
    if (!done && !capped) {
      // Record which marking is used before refining.
      rec.primal_marking =
          decide_marking(st.mu, st.zeta, options.theta, st.structure.size()).primal;
    }
    log.rows.push_back(rec);
    if (observer) observer(loop, rec);
    if (done) {
      log.converged = true;
      break;
    }
    if (capped) break;
    loop.mark_and_refine();
  }
  return log;
}

std::vector<double> reference_errors(const ConvergenceLog& log, double g_ref) {
  std::vector<double> e;
  e.reserve(log.rows.size());
  for (const auto& r : log.rows) e.push_back(std::abs(g_ref - r.goal_value));
  return e;
}

std::vector<double> reference_error(const AdaptiveProblem& problem, const AdaptiveOptions& options,
                                    const ConvergenceLog& log, double ref_tol,
                                    ConvergenceLog* ref_log) {
  if (!(ref_tol > 0.0 && ref_tol < options.tol)) throw ConfigError("ref_tol must lie in (0, tol)");
  AdaptiveOptions ref = options;
  ref.tol = ref_tol;
  ref.max_iter = std::max(options.max_iter, 1000);
  ConvergenceLog r = run(problem, ref);
  const double g_ref = r.rows.back().goal_value;
  if (ref_log) *ref_log = std::move(r);
  return reference_errors(log, g_ref);
}

}  // namespace goafem
