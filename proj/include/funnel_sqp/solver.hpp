#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "funnel_sqp/problem.hpp"
#include "funnel_sqp/qp_solver.hpp"
#include "funnel_sqp/strategy.hpp"
#include "funnel_sqp/subproblems.hpp"

namespace funnel_sqp {

enum class StrategyKind { Funnel, Filter };
enum class MechanismKind { TrustRegion, LineSearch };

const char* to_string(StrategyKind kind);
const char* to_string(MechanismKind kind);
/// Parses "funnel"/"filter" and "trust-region"/"line-search"; throws
/// std::invalid_argument otherwise.
StrategyKind parse_strategy(const std::string& text);
MechanismKind parse_mechanism(const std::string& text);

struct TrustRegionParameters {
  double initial_radius = 10.0;
  double grow = 2.0;
  double shrink = 0.5;
  double min_radius = 1e-16;
  double max_radius = 1e10;
  /// The region is active when ‖d‖∞ ≥ Δ(1 − activity_tolerance).
  double activity_tolerance = 1e-8;
};

struct LineSearchParameters {
  double shrink = 0.5;
  double alpha_min = 1e-9;
  /// Stop with SmallFeasibleStep when α drops below α_min at a feasible
  /// point instead of entering restoration.
  bool small_step_termination = false;
};

struct IterationRecord;

struct SolverConfig {
  StrategyKind strategy = StrategyKind::Funnel;
  MechanismKind mechanism = MechanismKind::TrustRegion;
  double tolerance = 1e-6;
  std::size_t max_outer_iterations = 4000;
  double unbounded_threshold = -1e20;
  FunnelParameters funnel;
  FilterParameters filter;
  TrustRegionParameters trust_region;
  LineSearchParameters line_search;
  SubproblemConfig subproblem;
  QpSolverConfig qp;
  /// Called once per trace row as it is produced.
  std::function<void(const IterationRecord&)> on_record;

  /// Defaults for a strategy/mechanism pair. Line search convexifies the
  /// Hessian with a shift of at least η₀.
  static SolverConfig preset(StrategyKind strategy, MechanismKind mechanism);
};

enum class SolveStatus {
  KktPoint,
  InfeasibleStationary,
  MaxIterations,
  Unbounded,
  SmallFeasibleStep,
  Error,
};

enum class ErrorKind {
  None,
  RegularizationFailed,
  RestorationStall,
  SmallStepInfeasible,
  MaxPivots,
  NonFiniteValue,
};

const char* to_string(SolveStatus status);
const char* to_string(ErrorKind kind);

/// Values behind one acceptance decision, kept for invariant checks.
struct StepAudit {
  Phase phase = Phase::Optimality;
  double f_current = 0.0;
  double h_current = 0.0;
  double alpha = 1.0;
  ProgressModels models;
  bool switching = false;
  double width_before = 0.0;
  double width_after = 0.0;
  bool entered_restoration = false;
  bool leaves_restoration = false;
  bool subproblem_feasible = true;
  double h_resto = 0.0;
  /// ‖λ‖∞ of the iterate when the direction was computed.
  double lambda_norm = 0.0;
  /// Filter after the decision was committed (empty for the funnel).
  std::vector<FilterEntry> filter;
  double filter_h_max = 0.0;
};

inline constexpr double kNotApplicable = std::numeric_limits<double>::quiet_NaN();

/// One row of the iteration table: the initial point or one inner trial.
struct IterationRecord {
  std::size_t k = 0;
  std::size_t l = 0;  // 0 for the initial point
  double radius = kNotApplicable;
  double alpha = kNotApplicable;
  /// Regularization of the direction computed for this trial (NaN when the
  /// trial reuses an earlier direction).
  double eta = kNotApplicable;
  /// Funnel width τ (funnel) or h_max (filter) when the trial was assessed.
  double width = 0.0;
  std::size_t filter_size = 0;
  double step_norm = kNotApplicable;
  double f = 0.0;
  double h = 0.0;
  /// ‖∇L‖₂ at accepted points, NaN for rejected trials.
  double lagrangian_norm = kNotApplicable;
  std::string label;
  bool accepted = false;
  std::optional<StepType> step_type;
  StepAudit audit;
};

struct StepCounts {
  std::size_t f_type = 0;
  std::size_t h_type = 0;
  std::size_t restoration = 0;
  std::size_t zero = 0;
};

struct SolveResult {
  SolveStatus status = SolveStatus::Error;
  ErrorKind error = ErrorKind::None;
  std::string message;
  Iterate final_iterate;
  Phase final_phase = Phase::Optimality;
  EvalCounters counters;
  std::vector<IterationRecord> trace;
  std::size_t outer_iterations = 0;
  StepCounts steps;
  double wall_time_seconds = 0.0;
};

struct StartPoint {
  Vector x;
  Vector lambda;
  Vector mu;
};

/// Runs the restoration SQP method. The start point (problem default when
/// absent) is projected onto the bounds.
SolveResult solve(const NcoProblem& problem, const SolverConfig& config,
                  const std::optional<StartPoint>& start = std::nullopt);

struct KktResiduals {
  double stationarity = 0.0;
  double feasibility = 0.0;
  double complementarity = 0.0;
};

/// Residuals of the KKT system of min ρf s.t. c = 0, l ≤ x ≤ u: the
/// Lagrangian gradient in the 2-norm (the norm reported in the iteration
/// table), constraints and complementarity in the ∞-norm.
KktResiduals kkt_residuals(const Iterate& iterate, const Vector& lower,
                           const Vector& upper, double rho);

/// Termination test at an accepted iterate: KktPoint in the optimality phase,
/// InfeasibleStationary in restoration (the iterate's λ are the feasibility
/// multipliers), Unbounded for feasible points with f below the threshold.
std::optional<SolveStatus> check_termination(const Iterate& iterate, Phase phase,
                                             const Vector& lower,
                                             const Vector& upper,
                                             double tolerance,
                                             double unbounded_threshold = -1e20);

}  // namespace funnel_sqp
