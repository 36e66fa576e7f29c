#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "funnel_sqp/problem.hpp"
#include "funnel_sqp/subproblems.hpp"

namespace funnel_sqp {

/// Predicted and actual reductions of the objective and the infeasibility.
struct ProgressModels {
  double predicted_f = 0.0;  // Δm_f(d) = −½dᵀWd − ∇fᵀd
  double predicted_h = 0.0;  // Δm_h(d) = h − ‖c + ∇cᵀd‖₁
  double actual_f = 0.0;     // f − f_trial
  double actual_h = 0.0;     // h − h_trial
};

/// Model reductions at `iterate` for step d. The actual reductions are left
/// at zero; fill them once the trial is evaluated.
ProgressModels compute_progress_models(const Iterate& iterate,
                                       const Matrix& hessian, const Vector& d);

enum class StepType { FType, HType, RestorationStep, KktZeroStep };
enum class Rejection { None, Funnel, Filter, Armijo };

const char* to_string(StepType type);

/// Everything the acceptance test needs to know about one trial.
struct TrialAssessment {
  Phase phase = Phase::Optimality;
  double f_current = 0.0;
  double h_current = 0.0;
  double f_trial = 0.0;
  double h_trial = 0.0;
  /// ‖step‖∞ of the direction (zero means a KKT zero step).
  double step_norm = 0.0;
  /// Step length; predicted reductions are scaled by it (1 for trust region).
  double alpha = 1.0;
  ProgressModels models;
  bool subproblem_feasible = true;
  double h_resto = 0.0;
};

struct StepVerdict {
  bool accepted = false;
  StepType type = StepType::FType;
  Rejection rejection = Rejection::None;
  /// The trial ends the restoration phase.
  bool leaves_restoration = false;
  /// Switching condition as evaluated (optimality tests only).
  bool switching = false;
  /// Width (funnel τ or filter h_max) before and after committing.
  double width_before = 0.0;
  double width_after = 0.0;
};

struct FunnelParameters {
  double tau_bar = 100.0;
  double kappa_bar = 1.25;
  double kappa = 0.5;
  double delta = 0.999;
  double sigma = 1e-4;
  double beta = 0.99;
  /// Alternative update max[βτ, (1 − κ)h_trial + κh⁽ᵏ⁾].
  bool gould_update = false;

  double contraction() const { return 1.0 - (1.0 - beta) * (1.0 - kappa); }
};

struct FilterParameters {
  double beta = 0.999;
  double gamma = 1e-3;
  std::size_t capacity = 50;
  /// h_max starts at max(τ̄, κ̄h₀) and the switching and Armijo tests use
  /// the funnel's δ and σ.
  double tau_bar = 100.0;
  double kappa_bar = 1.25;
  double delta = 0.999;
  double sigma = 1e-4;
};

struct FilterEntry {
  double h = 0.0;
  double f = 0.0;
};

/// Interface shared by the funnel and the filter. assess() is pure; commit()
/// applies an accepted verdict.
class GlobalizationStrategy {
 public:
  virtual ~GlobalizationStrategy() = default;
  virtual std::string name() const = 0;
  virtual void initialize(double h0, double f0) = 0;
  virtual StepVerdict assess(const TrialAssessment& trial) const = 0;
  virtual void commit(const StepVerdict& verdict, const TrialAssessment& trial) = 0;
  /// Funnel width τ, or the filter's h_max.
  virtual double width() const = 0;
  /// Number of filter entries (0 for the funnel).
  virtual std::size_t size() const = 0;
};

double funnel_initial_width(double h0, const FunnelParameters& params);
double funnel_update(double tau, double h_trial, double h_current,
                     const FunnelParameters& params);

class FunnelStrategy final : public GlobalizationStrategy {
 public:
  explicit FunnelStrategy(FunnelParameters params = {}) : params_(params) {}

  std::string name() const override { return "funnel"; }
  void initialize(double h0, double f0) override;
  StepVerdict assess(const TrialAssessment& trial) const override;
  void commit(const StepVerdict& verdict, const TrialAssessment& trial) override;
  double width() const override { return tau_; }
  std::size_t size() const override { return 0; }

  const FunnelParameters& parameters() const { return params_; }

 private:
  // Optimality-phase tests against the width `tau`.
  StepVerdict optimality_test(const TrialAssessment& trial) const;

  FunnelParameters params_;
  double tau_ = 0.0;
};

class FilterStrategy final : public GlobalizationStrategy {
 public:
  explicit FilterStrategy(FilterParameters params = {}) : params_(params) {}

  std::string name() const override { return "filter"; }
  void initialize(double h0, double f0) override;
  StepVerdict assess(const TrialAssessment& trial) const override;
  void commit(const StepVerdict& verdict, const TrialAssessment& trial) override;
  double width() const override { return h_max_; }
  std::size_t size() const override { return entries_.size(); }

  /// h ≤ βh_max and, for every entry, h ≤ βh_p or f ≤ f_p − γh.
  bool acceptable(double h, double f) const;
  /// Adds (h, f), removing entries it dominates and evicting the largest-h
  /// entry into h_max when the filter is full.
  void add(double h, double f);

  const std::vector<FilterEntry>& entries() const { return entries_; }
  const FilterParameters& parameters() const { return params_; }

 private:
  StepVerdict optimality_test(const TrialAssessment& trial) const;

  FilterParameters params_;
  std::vector<FilterEntry> entries_;
  double h_max_ = 0.0;
};

}  // namespace funnel_sqp
