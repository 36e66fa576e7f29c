#include "funnel_sqp/mechanism.hpp"

#include <algorithm>
#include <cmath>

namespace funnel_sqp {

namespace {

double inf_norm(const Vector& v) {
  return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>();
}

// Evaluates f and c at x; false when the evaluation is non-finite.
bool evaluate_trial(SolverContext& ctx, const Vector& x, Iterate& trial) {
  try {
    const FunctionValues values = ctx.evaluator.functions(x);
    trial.x = x;
    trial.f = values.f;
    trial.c = values.c;
    trial.h = infeasibility(values.c);
    return true;
  } catch (const NonFiniteValue&) {
    return false;
  }
}

const char* rejection_label(Rejection why) {
  switch (why) {
    case Rejection::Funnel: return "rejected (funnel)";
    case Rejection::Filter: return "rejected (filter)";
    case Rejection::Armijo: return "rejected (Armijo)";
    case Rejection::None: break;
  }
  return "rejected";
}

IterationRecord make_record(const SolverContext& ctx, std::size_t l,
                            double step_norm) {
  IterationRecord rec;
  rec.k = ctx.k;
  rec.l = l;
  rec.width = ctx.strategy.width();
  rec.filter_size = ctx.strategy.size();
  rec.step_norm = step_norm;
  return rec;
}

void push(SolverContext& ctx, IterationRecord rec) {
  // Accepted rows are reported by the outer loop once they are complete.
  const bool report = !rec.accepted;
  ctx.trace.push_back(std::move(rec));
  if (report && ctx.config.on_record) ctx.config.on_record(ctx.trace.back());
}

TrialAssessment assessment_for(const SolverContext& ctx, const Direction& dir,
                               const Iterate& trial, double alpha) {
  TrialAssessment t;
  t.phase = ctx.phase.phase;
  t.f_current = ctx.current.f;
  t.h_current = ctx.current.h;
  t.f_trial = trial.f;
  t.h_trial = trial.h;
  t.step_norm = alpha * inf_norm(dir.d);
  t.alpha = alpha;
  t.models = compute_progress_models(ctx.current, dir.hessian, dir.d);
  t.models.actual_f = ctx.current.f - trial.f;
  t.models.actual_h = ctx.current.h - trial.h;
  t.subproblem_feasible = dir.subproblem_feasible;
  t.h_resto = ctx.phase.h_resto;
  return t;
}

void fill_audit(StepAudit& audit, const TrialAssessment& t, const StepVerdict& v,
                const Direction& dir, double lambda_norm) {
  audit.phase = t.phase;
  audit.f_current = t.f_current;
  audit.h_current = t.h_current;
  audit.alpha = t.alpha;
  audit.models = t.models;
  audit.switching = v.switching;
  audit.width_before = v.width_before;
  audit.width_after = v.width_after;
  audit.entered_restoration = dir.entered_restoration;
  audit.leaves_restoration = v.leaves_restoration;
  audit.subproblem_feasible = t.subproblem_feasible;
  audit.h_resto = t.h_resto;
  audit.lambda_norm = lambda_norm;
}

}  // namespace

InnerResult trust_region_inner(SolverContext& ctx) {
  const auto& tr = ctx.config.trust_region;
  const NcoProblem& problem = ctx.evaluator.problem();
  InnerResult result;
  for (std::size_t l = 1;; ++l) {
    if (ctx.radius < tr.min_radius) {
      result.outcome = ctx.current.h <= ctx.config.tolerance
                           ? InnerOutcome::SmallFeasibleStep
                           : InnerOutcome::SmallStepInfeasible;
      return result;
    }
    const double radius = ctx.radius;
    Direction dir = compute_direction(ctx.current, ctx.phase, ctx.evaluator,
                                      ctx.qp_solver, ctx.config.subproblem, radius);
    const double lambda_norm = inf_norm(ctx.current.lambda);
    const double d_norm = inf_norm(dir.d);

    IterationRecord rec = make_record(ctx, l, d_norm);
    rec.radius = radius;
    rec.eta = dir.eta;

    if (dir.solution.status == QpStatus::Unbounded) {
      rec.f = ctx.current.f;
      rec.h = ctx.current.h;
      rec.label = "rejected (unbounded QP)";
      push(ctx, std::move(rec));
      ctx.radius = tr.shrink * radius;
      continue;
    }

    Iterate trial;
    const Vector x_trial = project_onto_bounds(ctx.current.x + dir.d,
                                               problem.lower_bounds,
                                               problem.upper_bounds);
    if (!evaluate_trial(ctx, x_trial, trial)) {
      rec.f = kNotApplicable;
      rec.h = kNotApplicable;
      rec.label = "rejected (evaluation)";
      push(ctx, std::move(rec));
      ctx.radius = tr.shrink * std::min(radius, d_norm);
      continue;
    }
    rec.f = trial.f;
    rec.h = trial.h;

    const TrialAssessment t = assessment_for(ctx, dir, trial, 1.0);
    const StepVerdict v = ctx.strategy.assess(t);
    fill_audit(rec.audit, t, v, dir, lambda_norm);
    if (!v.accepted) {
      rec.label = rejection_label(v.rejection);
      push(ctx, std::move(rec));
      ctx.radius = tr.shrink * std::min(radius, d_norm);
      continue;
    }

    rec.accepted = true;
    rec.step_type = v.type;
    rec.label = to_string(v.type);
    push(ctx, std::move(rec));
    if (d_norm >= radius * (1.0 - tr.activity_tolerance)) {
      ctx.radius = std::min(tr.grow * radius, tr.max_radius);
    }
    trial.lambda = dir.lambda;
    trial.mu = dir.mu;
    result.trial = std::move(trial);
    result.verdict = v;
    result.assessment = t;
    result.record = ctx.trace.size() - 1;
    return result;
  }
}

InnerResult line_search_inner(SolverContext& ctx) {
  const auto& ls = ctx.config.line_search;
  const NcoProblem& problem = ctx.evaluator.problem();
  InnerResult result;

  Direction dir = compute_direction(ctx.current, ctx.phase, ctx.evaluator,
                                    ctx.qp_solver, ctx.config.subproblem,
                                    std::nullopt);
  if (dir.entered_restoration && ++ctx.restoration_entries >= 2) {
    result.outcome = InnerOutcome::RestorationStall;
    return result;
  }
  double lambda_norm = inf_norm(ctx.current.lambda);
  bool fresh_direction = true;
  double alpha = 1.0;
  for (std::size_t l = 1;; ++l) {
    const double d_norm = inf_norm(dir.d);
    IterationRecord rec = make_record(ctx, l, alpha * d_norm);
    rec.alpha = alpha;
    if (fresh_direction) rec.eta = dir.eta;

    Iterate trial;
    bool evaluated = false;
    TrialAssessment t;
    StepVerdict v;
    if (dir.solution.status != QpStatus::Unbounded) {
      const Vector x_trial = project_onto_bounds(ctx.current.x + alpha * dir.d,
                                                 problem.lower_bounds,
                                                 problem.upper_bounds);
      evaluated = evaluate_trial(ctx, x_trial, trial);
    }
    if (!evaluated) {
      rec.f = kNotApplicable;
      rec.h = kNotApplicable;
      rec.label = dir.solution.status == QpStatus::Unbounded
                      ? "rejected (unbounded QP)"
                      : "rejected (evaluation)";
    } else {
      rec.f = trial.f;
      rec.h = trial.h;
      t = assessment_for(ctx, dir, trial, alpha);
      v = ctx.strategy.assess(t);
      fill_audit(rec.audit, t, v, dir, lambda_norm);
      rec.audit.entered_restoration = fresh_direction && dir.entered_restoration;
      if (v.accepted) {
        rec.accepted = true;
        rec.step_type = v.type;
        rec.label = to_string(v.type);
        push(ctx, std::move(rec));
        trial.lambda = ctx.current.lambda + alpha * (dir.lambda - ctx.current.lambda);
        trial.mu = ctx.current.mu + alpha * (dir.mu - ctx.current.mu);
        result.trial = std::move(trial);
        result.verdict = v;
        result.assessment = t;
        result.record = ctx.trace.size() - 1;
        ctx.restoration_entries = 0;
        return result;
      }
      rec.label = rejection_label(v.rejection);
    }
    push(ctx, std::move(rec));
    fresh_direction = false;
    alpha *= ls.shrink;
    if (alpha < ls.alpha_min) {
      if (ls.small_step_termination && ctx.current.h <= ctx.config.tolerance) {
        result.outcome = InnerOutcome::SmallFeasibleStep;
        return result;
      }
      if (++ctx.restoration_entries >= 2) {
        result.outcome = InnerOutcome::RestorationStall;
        return result;
      }
      enter_restoration(ctx.current, ctx.phase);
      dir = compute_direction(ctx.current, ctx.phase, ctx.evaluator,
                              ctx.qp_solver, ctx.config.subproblem, std::nullopt);
      dir.entered_restoration = true;
      lambda_norm = inf_norm(ctx.current.lambda);
      fresh_direction = true;
      alpha = 1.0;
    }
  }
}

}  // namespace funnel_sqp
