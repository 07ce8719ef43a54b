#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "goafem/estimator.hpp"
#include "goafem/goals.hpp"
#include "goafem/mlspace.hpp"
#include "goafem/solver.hpp"

namespace goafem {

/// One candidate for marking: a new vertex of some block, or a detail index.
struct MarkItem {
  enum class Kind { spatial, parametric };
  Kind kind = Kind::spatial;
  int block = -1;
  NewVertex vertex;
  MultiIndex index;
  double value_sq = 0.0;
};

/// Positions of a minimal-cardinality subset whose squared indicators sum to
/// at least theta times the total. Ties: spatial before parametric, then
/// block and vertex, then index order.
std::vector<int> doerfler_minimal(std::span<const MarkItem> items, double theta);

/// Joint item list with squared indicators of one bundle, or of two summed.
std::vector<MarkItem> mark_items(const IndicatorBundle& a, const IndicatorBundle* b = nullptr);

struct MarkingDecision {
  bool primal = true;
  std::size_t primal_count = 0;
  std::size_t combined_count = 0;
  MultilevelMarks marks;
};

/// Primal marking on mu^2 and combined marking on mu^2 + zeta^2; the primal
/// one is used whenever it is not larger.
MarkingDecision decide_marking(const IndicatorBundle& mu, const IndicatorBundle& zeta, double theta,
                               int num_blocks);

struct AdaptiveProblem {
  MeshPtr t0;
  CoefficientField coeff;
  RhsSpec rhs;
  GoalFunctional goal;

  static AdaptiveProblem for_setup(int setup);
};

struct AdaptiveOptions {
  double theta = 0.5;
  double tol = 0.0;
  int max_iter = 30;
  SolverOptions solver;
  /// When false the index set stays {0}: Q is treated as empty.
  bool parametric_enrichment = true;
};

struct AdaptiveState {
  int iteration = 0;
  MultilevelStructure structure;
  MlFunction u;
  MlFunction z;
  IndicatorBundle mu;
  IndicatorBundle zeta;
  double product = 0.0;
  double goal_value = 0.0;
  SolveReport primal_report;
  SolveReport dual_report;
};

/// Adaptive loop driver. `solve_and_estimate` performs the primal solve, the dual
/// solve at the new primal solution, and both estimates; `mark_and_refine`
/// selects the marking and builds the next structure.
class AdaptiveLoop {
 public:
  AdaptiveLoop(AdaptiveProblem problem, AdaptiveOptions options);

  const AdaptiveState& solve_and_estimate();
  MarkingDecision mark_and_refine();
  /// Both halves; returns the marking.
  MarkingDecision step();

  const AdaptiveState& state() const { return state_; }
  const AdaptiveProblem& problem() const { return problem_; }
  const AdaptiveOptions& options() const { return options_; }
  OperatorAssembler& assembler() { return assembler_; }
  FactorCache& factors() { return factors_; }

 private:
  AdaptiveProblem problem_;
  AdaptiveOptions options_;
  OperatorAssembler assembler_;
  FactorCache factors_;
  AdaptiveState state_;
  bool estimated_ = false;
};

struct IterationRecord {
  int iter = 0;
  int dofs = 0;
  double mu = 0.0;
  double zeta = 0.0;
  double product = 0.0;
  double goal_value = 0.0;
  int n_indices = 0;
  int max_param = 0;
  double seconds = 0.0;
  int primal_iterations = 0;
  int dual_iterations = 0;
  bool primal_marking = true;
};

struct ConvergenceLog {
  std::vector<IterationRecord> rows;
  bool converged = false;  // product fell below tol
};

using IterationObserver = std::function<void(const AdaptiveLoop&, const IterationRecord&)>;

/// Iterates until mu sqrt(mu^2 + zeta^2) < tol or the iteration count reaches max_iter.
ConvergenceLog run(const AdaptiveProblem& problem, const AdaptiveOptions& options,
                   const IterationObserver& observer = {});

/// |g_ref - g_l| per logged iteration.
std::vector<double> reference_errors(const ConvergenceLog& log, double g_ref);

/// Runs the loop again to ref_tol and compares the goal values of `log` with
/// the final reference goal value.
std::vector<double> reference_error(const AdaptiveProblem& problem, const AdaptiveOptions& options,
                                    const ConvergenceLog& log, double ref_tol,
                                    ConvergenceLog* ref_log = nullptr);

}  // namespace goafem
