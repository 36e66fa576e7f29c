#pragma once

#include <cstddef>
#include <vector>

#include "funnel_sqp/solver.hpp"

namespace funnel_sqp {

/// Mutable state of one solve shared by the outer loop and the inner loops.
struct SolverContext {
  const SolverConfig& config;
  Evaluator& evaluator;
  QpSolver& qp_solver;
  GlobalizationStrategy& strategy;
  PhaseState& phase;
  Iterate& current;
  std::vector<IterationRecord>& trace;
  std::size_t k = 0;
  /// Trust-region radius, carried across outer iterations.
  double radius = 10.0;
  /// Restoration entries since the last accepted step.
  std::size_t restoration_entries = 0;
};

enum class InnerOutcome {
  Accepted,
  SmallFeasibleStep,
  SmallStepInfeasible,
  RestorationStall,
};

struct InnerResult {
  InnerOutcome outcome = InnerOutcome::Accepted;
  /// Accepted trial with x, f, c, h and trial multipliers set; derivatives
  /// are left for the caller.
  Iterate trial;
  StepVerdict verdict;
  TrialAssessment assessment;
  /// Index of the accepted row in the trace.
  std::size_t record = 0;
};

/// Inner loop of the trust-region method: recompute the direction with the
/// current radius until a trial is acceptable, shrinking the radius on
/// rejection and growing it when an accepted step touches it.
InnerResult trust_region_inner(SolverContext& ctx);

/// Inner loop of the line-search method: backtrack along one direction,
/// switching to restoration when α falls below α_min.
InnerResult line_search_inner(SolverContext& ctx);

}  // namespace funnel_sqp
