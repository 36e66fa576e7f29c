#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "funnel_sqp/common.hpp"

namespace funnel_sqp {

/// Closed-form (or AD-backed) evaluators of a smooth problem.
///
/// The constraint Jacobian is stored as in the optimization literature's
/// ∇c(x): an n×m matrix whose j-th column is the gradient of c_j. The
/// Lagrangian Hessian is W_ρ(x, λ) = ρ∇²f(x) − Σ_j λ_j ∇²c_j(x).
struct ProblemFunctions {
  std::function<double(const Vector&)> objective;
  std::function<Vector(const Vector&)> objective_gradient;
  std::function<Vector(const Vector&)> constraints;
  std::function<Matrix(const Vector&)> constraint_jacobian;
  std::function<Matrix(const Vector&, double rho, const Vector& lambda)>
      lagrangian_hessian;
};

/// Standard-form instance: min f(x) s.t. c(x) = 0, lower ≤ x ≤ upper.
///
/// Immutable after construction; evaluation counters live in Evaluator so
/// that one problem can be solved concurrently.
struct NcoProblem {
  std::string name;
  std::size_t n_vars = 0;
  std::size_t n_eq = 0;
  Vector lower_bounds;
  Vector upper_bounds;
  ProblemFunctions functions;
  Vector initial_point;
  Vector initial_multipliers;        // λ⁽⁰⁾, length n_eq
  Vector initial_bound_multipliers;  // μ⁽⁰⁾, length n_vars
  /// Names of the variables, used only for reports.
  std::vector<std::string> variable_names;
  /// Number of leading variables that belong to the user's model; the
  /// remainder are slacks introduced by to_standard_form.
  std::size_t n_original_vars = 0;

  /// Throws std::invalid_argument when dimensions or bounds are inconsistent.
  void validate() const;
};

/// Problem with general two-sided constraints cl ≤ c(x) ≤ cu.
struct GeneralProblem {
  std::string name;
  std::size_t n_vars = 0;
  std::size_t n_cons = 0;
  Vector lower_bounds;
  Vector upper_bounds;
  Vector constraint_lower;
  Vector constraint_upper;
  ProblemFunctions functions;
  Vector initial_point;
  Vector initial_multipliers;
  std::vector<std::string> variable_names;
};

/// Rewrites every non-equality row as c_j(x) − s_j = 0 with cl_j ≤ s_j ≤ cu_j.
/// Equality rows (cl = cu) become c_j(x) − cl_j = 0. Slack starts are the
/// projections of c(x⁽⁰⁾) onto [cl, cu].
NcoProblem to_standard_form(const GeneralProblem& problem);

struct EvalCounters {
  std::size_t n_f = 0;
  std::size_t n_c = 0;
  std::size_t n_grad_f = 0;
  std::size_t n_jac_c = 0;
  std::size_t n_hess = 0;
};

struct FunctionValues {
  double f = 0.0;
  Vector c;
};

/// Per-solve view of a problem that counts evaluations and rejects
/// non-finite results.
class Evaluator {
 public:
  explicit Evaluator(const NcoProblem& problem) : problem_(&problem) {}

  const NcoProblem& problem() const { return *problem_; }
  const EvalCounters& counters() const { return counters_; }

  FunctionValues functions(const Vector& x);
  Vector objective_gradient(const Vector& x);
  Matrix constraint_jacobian(const Vector& x);
  Matrix lagrangian_hessian(const Vector& x, double rho, const Vector& lambda);

 private:
  const NcoProblem* problem_;
  EvalCounters counters_;
};

/// h(x) = ‖c‖₁.
double infeasibility(const Vector& c);

/// Primal-dual point with cached function values and first derivatives.
struct Iterate {
  Vector x;
  Vector lambda;
  Vector mu;
  double f = 0.0;
  Vector c;
  double h = 0.0;
  Vector grad_f;
  Matrix jac_c;
};

/// ∇ₓL(x, ρ, λ, μ) = ρ∇f − ∇c λ − μ.
Vector lagrangian_gradient(const Vector& grad_f, const Matrix& jac_c,
                           double rho, const Vector& lambda, const Vector& mu);

/// Componentwise projection of x onto [lower, upper].
Vector project_onto_bounds(const Vector& x, const Vector& lower,
                           const Vector& upper);

}  // namespace funnel_sqp
