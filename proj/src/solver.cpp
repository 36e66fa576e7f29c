#include "funnel_sqp/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "funnel_sqp/mechanism.hpp"

namespace funnel_sqp {

const char* to_string(StrategyKind kind) {
  return kind == StrategyKind::Funnel ? "funnel" : "filter";
}

const char* to_string(MechanismKind kind) {
  return kind == MechanismKind::TrustRegion ? "trust-region" : "line-search";
}

StrategyKind parse_strategy(const std::string& text) {
  if (text == "funnel") return StrategyKind::Funnel;
  if (text == "filter") return StrategyKind::Filter;
  throw std::invalid_argument("unknown strategy '" + text + "'");
}

MechanismKind parse_mechanism(const std::string& text) {
  if (text == "trust-region") return MechanismKind::TrustRegion;
  if (text == "line-search") return MechanismKind::LineSearch;
  throw std::invalid_argument("unknown mechanism '" + text + "'");
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::KktPoint: return "kkt-point";
    case SolveStatus::InfeasibleStationary: return "infeasible-stationary";
    case SolveStatus::MaxIterations: return "max-iterations";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::SmallFeasibleStep: return "small-feasible-step";
    case SolveStatus::Error: return "error";
  }
  return "?";
}

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::None: return "none";
    case ErrorKind::RegularizationFailed: return "regularization-failed";
    case ErrorKind::RestorationStall: return "restoration-stall";
    case ErrorKind::SmallStepInfeasible: return "small-step-infeasible";
    case ErrorKind::MaxPivots: return "max-pivots";
    case ErrorKind::NonFiniteValue: return "non-finite-value";
  }
  return "?";
}

SolverConfig SolverConfig::preset(StrategyKind strategy, MechanismKind mechanism) {
  SolverConfig config;
  config.strategy = strategy;
  config.mechanism = mechanism;
  const bool line_search = mechanism == MechanismKind::LineSearch;
  config.subproblem.convexify = line_search;
  config.subproblem.try_zero_shift = !line_search;
  return config;
}

namespace {

double inf_norm(const Vector& v) {
  return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>();
}

double complementarity(const Vector& x, const Vector& mu, const Vector& lower,
                       const Vector& upper) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double value = 0.0;
    if (mu[i] > 0.0) {
      value = std::isfinite(lower[i]) ? mu[i] * (x[i] - lower[i]) : mu[i];
    } else if (mu[i] < 0.0) {
      value = std::isfinite(upper[i]) ? -mu[i] * (upper[i] - x[i]) : -mu[i];
    }
    worst = std::max(worst, std::abs(value));
  }
  return worst;
}

}  // namespace

KktResiduals kkt_residuals(const Iterate& it, const Vector& lower,
                           const Vector& upper, double rho) {
  KktResiduals r;
  r.stationarity = lagrangian_gradient(it.grad_f, it.jac_c, rho, it.lambda, it.mu)
                       .norm();
  r.feasibility = inf_norm(it.c);
  r.complementarity = complementarity(it.x, it.mu, lower, upper);
  return r;
}

std::optional<SolveStatus> check_termination(const Iterate& it, Phase phase,
                                             const Vector& lower,
                                             const Vector& upper,
                                             double tolerance,
                                             double unbounded_threshold) {
  const double c_norm = inf_norm(it.c);
  if (c_norm <= tolerance && it.f < unbounded_threshold) {
    return SolveStatus::Unbounded;
  }
  if (phase == Phase::Optimality) {
    const KktResiduals r = kkt_residuals(it, lower, upper, 1.0);
    if (r.stationarity <= tolerance && r.feasibility <= tolerance &&
        r.complementarity <= tolerance) {
      return SolveStatus::KktPoint;
    }
    return std::nullopt;
  }
  if (c_norm <= tolerance) return std::nullopt;
  // Stationarity of min ‖c‖₁ written through the elastic QP: λ_j are the
  // multipliers of c + ∇cᵀd − u + v = 0, with elastic multipliers 1 ± λ_j.
  const KktResiduals r = kkt_residuals(it, lower, upper, 0.0);
  if (r.stationarity > tolerance || r.complementarity > tolerance) {
    return std::nullopt;
  }
  for (Eigen::Index j = 0; j < it.c.size(); ++j) {
    const double lam = it.lambda[j];
    if (std::abs(lam) > 1.0 + tolerance) return std::nullopt;
    if ((1.0 + lam) * std::max(it.c[j], 0.0) > tolerance) return std::nullopt;
    if ((1.0 - lam) * std::max(-it.c[j], 0.0) > tolerance) return std::nullopt;
  }
  return SolveStatus::InfeasibleStationary;
}

namespace {

std::unique_ptr<GlobalizationStrategy> make_strategy(const SolverConfig& config) {
  if (config.strategy == StrategyKind::Funnel) {
    return std::make_unique<FunnelStrategy>(config.funnel);
  }
  return std::make_unique<FilterStrategy>(config.filter);
}

void evaluate_derivatives(Evaluator& evaluator, Iterate& it) {
  it.grad_f = evaluator.objective_gradient(it.x);
  it.jac_c = evaluator.constraint_jacobian(it.x);
}

double lagrangian_norm(const Iterate& it, Phase phase) {
  const double rho = phase == Phase::Optimality ? 1.0 : 0.0;
  return lagrangian_gradient(it.grad_f, it.jac_c, rho, it.lambda, it.mu).norm();
}

void snapshot_filter(const GlobalizationStrategy& strategy, StepAudit& audit) {
  if (const auto* filter = dynamic_cast<const FilterStrategy*>(&strategy)) {
    audit.filter = filter->entries();
    audit.filter_h_max = filter->width();
  }
}

}  // namespace

SolveResult solve(const NcoProblem& problem, const SolverConfig& config,
                  const std::optional<StartPoint>& start) {
  if (!(config.tolerance > 0.0)) {
    throw std::invalid_argument("tolerance must be positive");
  }
  problem.validate();
  const auto t0 = std::chrono::steady_clock::now();
  SolveResult result;
  Evaluator evaluator(problem);
  QpSolver qp_solver(config.qp);
  auto strategy = make_strategy(config);
  PhaseState phase;
  Iterate current;

  auto finish = [&](SolveStatus status, ErrorKind error = ErrorKind::None,
                    std::string message = {}) {
    result.status = status;
    result.error = error;
    result.message = std::move(message);
    result.final_iterate = current;
    result.final_phase = phase.phase;
    result.counters = evaluator.counters();
    result.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
  };

  current.x = project_onto_bounds(start ? start->x : problem.initial_point,
                                  problem.lower_bounds, problem.upper_bounds);
  current.lambda = start && start->lambda.size() == static_cast<Eigen::Index>(problem.n_eq)
                       ? start->lambda
                       : problem.initial_multipliers;
  current.mu = start && start->mu.size() == static_cast<Eigen::Index>(problem.n_vars)
                   ? start->mu
                   : problem.initial_bound_multipliers;
  try {
    const FunctionValues values = evaluator.functions(current.x);
    current.f = values.f;
    current.c = values.c;
    current.h = infeasibility(values.c);
    evaluate_derivatives(evaluator, current);
  } catch (const NonFiniteValue& e) {
    return finish(SolveStatus::Error, ErrorKind::NonFiniteValue, e.what());
  }
  strategy->initialize(current.h, current.f);

  SolverContext ctx{config,   evaluator,    qp_solver,    *strategy,
                    phase,    current,      result.trace, 0,
                    config.trust_region.initial_radius};

  {
    IterationRecord rec;
    rec.k = 0;
    rec.l = 0;
    if (config.mechanism == MechanismKind::TrustRegion) rec.radius = ctx.radius;
    rec.width = strategy->width();
    rec.filter_size = strategy->size();
    rec.f = current.f;
    rec.h = current.h;
    rec.lagrangian_norm = lagrangian_norm(current, phase.phase);
    rec.label = "initial point";
    rec.accepted = true;
    result.trace.push_back(rec);
  }
  auto terminated = [&]() {
    return check_termination(current, phase.phase, problem.lower_bounds,
                             problem.upper_bounds, config.tolerance,
                             config.unbounded_threshold);
  };
  {
    const auto status = terminated();
    if (status == SolveStatus::KktPoint) result.trace.back().label = "ε-optimal";
    if (config.on_record) config.on_record(result.trace.back());
    if (status) return finish(*status);
  }

  for (std::size_t k = 1; k <= config.max_outer_iterations; ++k) {
    ctx.k = k;
    InnerResult inner;
    try {
      inner = config.mechanism == MechanismKind::TrustRegion
                  ? trust_region_inner(ctx)
                  : line_search_inner(ctx);
    } catch (const RegularizationFailed& e) {
      return finish(SolveStatus::Error, ErrorKind::RegularizationFailed, e.what());
    } catch (const MaxPivots& e) {
      return finish(SolveStatus::Error, ErrorKind::MaxPivots, e.what());
    } catch (const NonFiniteValue& e) {
      return finish(SolveStatus::Error, ErrorKind::NonFiniteValue, e.what());
    }
    switch (inner.outcome) {
      case InnerOutcome::Accepted: break;
      case InnerOutcome::SmallFeasibleStep:
        return finish(SolveStatus::SmallFeasibleStep);
      case InnerOutcome::SmallStepInfeasible:
        return finish(SolveStatus::Error, ErrorKind::SmallStepInfeasible,
                      "step size fell below its minimum at an infeasible point");
      case InnerOutcome::RestorationStall:
        return finish(SolveStatus::Error, ErrorKind::RestorationStall,
                      "restoration entered twice without an accepted step");
    }

    strategy->commit(inner.verdict, inner.assessment);
    current = std::move(inner.trial);
    if (inner.verdict.leaves_restoration) {
      phase.phase = Phase::Optimality;
      current.lambda.setZero();
      current.mu.setZero();
    }
    try {
      evaluate_derivatives(evaluator, current);
    } catch (const NonFiniteValue& e) {
      return finish(SolveStatus::Error, ErrorKind::NonFiniteValue, e.what());
    }
    ++result.outer_iterations;
    switch (inner.verdict.type) {
      case StepType::FType: ++result.steps.f_type; break;
      case StepType::HType: ++result.steps.h_type; break;
      case StepType::RestorationStep: ++result.steps.restoration; break;
      case StepType::KktZeroStep: ++result.steps.zero; break;
    }
    IterationRecord& rec = result.trace[inner.record];
    rec.lagrangian_norm = lagrangian_norm(current, phase.phase);
    snapshot_filter(*strategy, rec.audit);

    const auto status = terminated();
    if (status == SolveStatus::KktPoint) rec.label = "ε-optimal";
    if (config.on_record) config.on_record(rec);
    if (status) return finish(*status);
  }
  return finish(SolveStatus::MaxIterations);
}

}  // namespace funnel_sqp
