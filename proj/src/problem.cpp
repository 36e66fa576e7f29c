#include "funnel_sqp/problem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace funnel_sqp {

void NcoProblem::validate() const {
  auto fail = [this](const std::string& what) {
    throw std::invalid_argument("problem '" + name + "': " + what);
  };
  if (static_cast<std::size_t>(lower_bounds.size()) != n_vars ||
      static_cast<std::size_t>(upper_bounds.size()) != n_vars) {
    fail("bound vectors must have n_vars entries");
  }
  if (static_cast<std::size_t>(initial_point.size()) != n_vars) {
    fail("initial point must have n_vars entries");
  }
  if (static_cast<std::size_t>(initial_multipliers.size()) != n_eq) {
    fail("initial multipliers must have n_eq entries");
  }
  if (static_cast<std::size_t>(initial_bound_multipliers.size()) != n_vars) {
    fail("initial bound multipliers must have n_vars entries");
  }
  for (std::size_t i = 0; i < n_vars; ++i) {
    if (!(lower_bounds[i] <= upper_bounds[i])) {
      fail("lower bound exceeds upper bound for variable " + std::to_string(i));
    }
  }
  if (!functions.objective || !functions.objective_gradient ||
      !functions.constraints || !functions.constraint_jacobian ||
      !functions.lagrangian_hessian) {
    fail("missing evaluator");
  }
}

namespace {

void require_finite(const Eigen::Ref<const Matrix>& m, const char* what) {
  if (!m.allFinite()) {
    throw NonFiniteValue(std::string("non-finite ") + what);
  }
}

}  // namespace

FunctionValues Evaluator::functions(const Vector& x) {
  ++counters_.n_f;
  ++counters_.n_c;
  FunctionValues values;
  values.f = problem_->functions.objective(x);
  values.c = problem_->functions.constraints(x);
  if (!std::isfinite(values.f)) {
    throw NonFiniteValue("non-finite objective");
  }
  require_finite(values.c, "constraint value");
  return values;
}

Vector Evaluator::objective_gradient(const Vector& x) {
  ++counters_.n_grad_f;
  Vector g = problem_->functions.objective_gradient(x);
  require_finite(g, "objective gradient");
  return g;
}

Matrix Evaluator::constraint_jacobian(const Vector& x) {
  ++counters_.n_jac_c;
  Matrix jac = problem_->functions.constraint_jacobian(x);
  require_finite(jac, "constraint Jacobian");
  return jac;
}

Matrix Evaluator::lagrangian_hessian(const Vector& x, double rho,
                                     const Vector& lambda) {
  ++counters_.n_hess;
  Matrix w = problem_->functions.lagrangian_hessian(x, rho, lambda);
  require_finite(w, "Lagrangian Hessian");
  return w;
}

double infeasibility(const Vector& c) { return c.lpNorm<1>(); }

Vector lagrangian_gradient(const Vector& grad_f, const Matrix& jac_c,
                           double rho, const Vector& lambda, const Vector& mu) {
  Vector g = rho * grad_f - mu;
  if (jac_c.cols() > 0) {
    g.noalias() -= jac_c * lambda;
  }
  return g;
}

Vector project_onto_bounds(const Vector& x, const Vector& lower,
                           const Vector& upper) {
  return x.cwiseMax(lower).cwiseMin(upper);
}

NcoProblem to_standard_form(const GeneralProblem& gp) {
  const std::size_t n = gp.n_vars;
  const std::size_t m = gp.n_cons;
  for (std::size_t j = 0; j < m; ++j) {
    if (gp.constraint_lower[j] > gp.constraint_upper[j]) {
      throw InconsistentRange("constraint " + std::to_string(j) + " of '" +
                              gp.name + "' has lower bound above upper bound");
    }
  }

  // slack_of[j] = index of the slack variable of row j, or -1 for equalities
  std::vector<long> slack_of(m, -1);
  std::size_t n_slack = 0;
  for (std::size_t j = 0; j < m; ++j) {
    if (gp.constraint_lower[j] != gp.constraint_upper[j]) {
      slack_of[j] = static_cast<long>(n + n_slack);
      ++n_slack;
    }
  }

  NcoProblem p;
  p.name = gp.name;
  p.n_vars = n + n_slack;
  p.n_eq = m;
  p.n_original_vars = n;
  p.lower_bounds.resize(p.n_vars);
  p.upper_bounds.resize(p.n_vars);
  p.lower_bounds.head(n) = gp.lower_bounds;
  p.upper_bounds.head(n) = gp.upper_bounds;
  p.variable_names = gp.variable_names;
  if (p.variable_names.size() != n) {
    p.variable_names.clear();
    for (std::size_t i = 0; i < n; ++i) {
      p.variable_names.push_back("x" + std::to_string(i + 1));
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    if (slack_of[j] >= 0) {
      p.lower_bounds[slack_of[j]] = gp.constraint_lower[j];
      p.upper_bounds[slack_of[j]] = gp.constraint_upper[j];
      p.variable_names.push_back("s" + std::to_string(j + 1));
    }
  }

  p.initial_point.resize(p.n_vars);
  p.initial_point.head(n) = gp.initial_point;
  if (n_slack > 0) {
    const Vector c0 = gp.functions.constraints(gp.initial_point);
    for (std::size_t j = 0; j < m; ++j) {
      if (slack_of[j] >= 0) {
        double s = c0[j];
        if (!std::isfinite(s)) s = 0.0;
        p.initial_point[slack_of[j]] =
            std::clamp(s, gp.constraint_lower[j], gp.constraint_upper[j]);
      }
    }
  }
  p.initial_multipliers = gp.initial_multipliers.size() == static_cast<long>(m)
                              ? gp.initial_multipliers
                              : Vector::Zero(m);
  p.initial_bound_multipliers = Vector::Zero(p.n_vars);

  const auto base = gp.functions;
  const Vector cl = gp.constraint_lower;
  p.functions.objective = [base, n](const Vector& x) {
    return base.objective(x.head(n));
  };
  p.functions.objective_gradient = [base, n, total = p.n_vars](const Vector& x) {
    Vector g = Vector::Zero(total);
    g.head(n) = base.objective_gradient(x.head(n));
    return g;
  };
  p.functions.constraints = [base, n, slack_of, cl](const Vector& x) {
    Vector c = base.constraints(x.head(n));
    for (std::size_t j = 0; j < slack_of.size(); ++j) {
      c[j] -= slack_of[j] >= 0 ? x[slack_of[j]] : cl[j];
    }
    return c;
  };
  p.functions.constraint_jacobian = [base, n, slack_of,
                                     total = p.n_vars](const Vector& x) {
    Matrix jac = Matrix::Zero(total, slack_of.size());
    jac.topRows(n) = base.constraint_jacobian(x.head(n));
    for (std::size_t j = 0; j < slack_of.size(); ++j) {
      if (slack_of[j] >= 0) jac(slack_of[j], j) = -1.0;
    }
    return jac;
  };
  p.functions.lagrangian_hessian = [base, n, total = p.n_vars](
                                       const Vector& x, double rho,
                                       const Vector& lambda) {
    Matrix w = Matrix::Zero(total, total);
    w.topLeftCorner(n, n) = base.lagrangian_hessian(x.head(n), rho, lambda);
    return w;
  };
  return p;
}

}  // namespace funnel_sqp
