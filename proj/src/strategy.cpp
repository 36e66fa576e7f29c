#include "funnel_sqp/strategy.hpp"

#include <algorithm>
#include <cmath>

namespace funnel_sqp {

ProgressModels compute_progress_models(const Iterate& iterate,
                                       const Matrix& hessian, const Vector& d) {
  ProgressModels models;
  models.predicted_f = -0.5 * d.dot(hessian * d) - iterate.grad_f.dot(d);
  Vector linearized = iterate.c;
  if (iterate.c.size() > 0) linearized.noalias() += iterate.jac_c.transpose() * d;
  models.predicted_h = iterate.h - infeasibility(linearized);
  return models;
}

const char* to_string(StepType type) {
  switch (type) {
    case StepType::FType: return "f-type step";
    case StepType::HType: return "h-type step";
    case StepType::RestorationStep: return "restoration step";
    case StepType::KktZeroStep: return "zero step";
  }
  return "?";
}

double funnel_initial_width(double h0, const FunnelParameters& params) {
  return std::max(params.tau_bar, params.kappa_bar * h0);
}

double funnel_update(double tau, double h_trial, double h_current,
                     const FunnelParameters& params) {
  if (params.gould_update) {
    return std::max(params.beta * tau,
                    (1.0 - params.kappa) * h_trial + params.kappa * h_current);
  }
  return (1.0 - params.kappa) * h_trial + params.kappa * tau;
}

namespace {

StepVerdict accept(StepType type, double width) {
  StepVerdict v;
  v.accepted = true;
  v.type = type;
  v.width_before = width;
  v.width_after = width;
  return v;
}

StepVerdict reject(Rejection why, double width) {
  StepVerdict v;
  v.rejection = why;
  v.width_before = width;
  v.width_after = width;
  return v;
}

bool switching_condition(const TrialAssessment& t, double delta) {
  return t.alpha * t.models.predicted_f >= delta * t.h_current * t.h_current;
}

bool armijo_f(const TrialAssessment& t, double sigma) {
  return t.f_current - t.f_trial >= sigma * t.alpha * t.models.predicted_f;
}

bool armijo_h(const TrialAssessment& t, double sigma) {
  return t.h_current - t.h_trial >= sigma * t.alpha * t.models.predicted_h;
}

}  // namespace

// ---------------------------------------------------------------- funnel

void FunnelStrategy::initialize(double h0, double) {
  tau_ = funnel_initial_width(h0, params_);
}

StepVerdict FunnelStrategy::optimality_test(const TrialAssessment& t) const {
  if (t.h_trial > tau_) return reject(Rejection::Funnel, tau_);
  const bool switching = switching_condition(t, params_.delta);
  StepVerdict v;
  if (switching) {
    v = armijo_f(t, params_.sigma) ? accept(StepType::FType, tau_)
                                   : reject(Rejection::Armijo, tau_);
  } else if (t.h_trial <= params_.beta * tau_) {
    v = accept(StepType::HType, tau_);
    v.width_after = funnel_update(tau_, t.h_trial, t.h_current, params_);
  } else {
    v = reject(Rejection::Funnel, tau_);
  }
  v.switching = switching;
  return v;
}

StepVerdict FunnelStrategy::assess(const TrialAssessment& t) const {
  const bool can_leave =
      t.phase == Phase::Restoration && t.subproblem_feasible &&
      t.h_trial <= params_.beta * std::min(tau_, t.h_resto);

  if (t.step_norm == 0.0) {
    StepVerdict v = accept(StepType::KktZeroStep, tau_);
    if (can_leave) {
      v.leaves_restoration = true;
      v.width_after = funnel_update(tau_, t.h_trial, t.h_current, params_);
    }
    return v;
  }
  if (t.phase == Phase::Optimality) return optimality_test(t);

  if (can_leave) {
    StepVerdict v = optimality_test(t);
    if (v.accepted) {
      v.leaves_restoration = true;
      v.width_after = funnel_update(tau_, t.h_trial, t.h_current, params_);
      return v;
    }
  }
  return armijo_h(t, params_.sigma) ? accept(StepType::RestorationStep, tau_)
                                    : reject(Rejection::Armijo, tau_);
}

void FunnelStrategy::commit(const StepVerdict& verdict, const TrialAssessment&) {
  if (verdict.accepted) tau_ = verdict.width_after;
}

// ---------------------------------------------------------------- filter

void FilterStrategy::initialize(double h0, double) {
  entries_.clear();
  h_max_ = std::max(params_.tau_bar, params_.kappa_bar * h0);
}

bool FilterStrategy::acceptable(double h, double f) const {
  if (h > params_.beta * h_max_) return false;
  for (const FilterEntry& e : entries_) {
    if (!(h <= params_.beta * e.h || f <= e.f - params_.gamma * h)) return false;
  }
  return true;
}

void FilterStrategy::add(double h, double f) {
  std::erase_if(entries_, [&](const FilterEntry& e) { return e.h >= h && e.f >= f; });
  auto pos = std::lower_bound(
      entries_.begin(), entries_.end(), h,
      [](const FilterEntry& e, double value) { return e.h < value; });
  entries_.insert(pos, FilterEntry{h, f});
  // Entries are sorted by h, so the one with the largest h is last; it may be
  // the entry just added.
  if (entries_.size() > params_.capacity) {
    h_max_ = std::min(h_max_, entries_.back().h);
    entries_.pop_back();
  }
}

StepVerdict FilterStrategy::optimality_test(const TrialAssessment& t) const {
  if (!acceptable(t.h_trial, t.f_trial)) return reject(Rejection::Filter, h_max_);
  const bool switching = switching_condition(t, params_.delta);
  StepVerdict v;
  if (switching || t.h_current == 0.0) {
    // With a feasible current iterate the filter entry would be (0, f), so a
    // sufficient decrease of f is enforced instead.
    v = armijo_f(t, params_.sigma) ? accept(StepType::FType, h_max_)
                                   : reject(Rejection::Armijo, h_max_);
  } else if (t.f_trial <= t.f_current - params_.gamma * t.h_trial ||
             t.h_trial <= params_.beta * t.h_current) {
    v = accept(StepType::HType, h_max_);
  } else {
    v = reject(Rejection::Filter, h_max_);
  }
  v.switching = switching;
  return v;
}

StepVerdict FilterStrategy::assess(const TrialAssessment& t) const {
  const bool can_leave = t.phase == Phase::Restoration && t.subproblem_feasible &&
                         acceptable(t.h_trial, t.f_trial) &&
                         t.h_trial <= params_.beta * t.h_resto;
  if (t.step_norm == 0.0) {
    StepVerdict v = accept(StepType::KktZeroStep, h_max_);
    v.leaves_restoration = can_leave;
    return v;
  }
  if (t.phase == Phase::Optimality) return optimality_test(t);
  if (can_leave) {
    StepVerdict v = optimality_test(t);
    if (v.accepted) {
      v.leaves_restoration = true;
      return v;
    }
  }
  return armijo_h(t, params_.sigma) ? accept(StepType::RestorationStep, h_max_)
                                    : reject(Rejection::Armijo, h_max_);
}

void FilterStrategy::commit(const StepVerdict& verdict, const TrialAssessment& t) {
  if (verdict.accepted && verdict.type == StepType::HType) {
    add(t.h_current, t.f_current);
  }
}

}  // namespace funnel_sqp
