#include "funnel_sqp/builtin_problems.hpp"

#include <cmath>

namespace funnel_sqp {

namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

NcoProblem make(std::string name, std::size_t n, std::size_t m, Vector x0,
                ProblemFunctions functions) {
  NcoProblem p;
  p.name = std::move(name);
  p.n_vars = n;
  p.n_eq = m;
  p.n_original_vars = n;
  p.lower_bounds = Vector::Constant(n, -kInf);
  p.upper_bounds = Vector::Constant(n, kInf);
  p.initial_point = std::move(x0);
  p.initial_multipliers = Vector::Zero(m);
  p.initial_bound_multipliers = Vector::Zero(n);
  p.functions = std::move(functions);
  for (std::size_t i = 0; i < n; ++i) {
    p.variable_names.push_back("x" + std::to_string(i + 1));
  }
  return p;
}

// min 2(x1² + x2² − 1) − x1  s.t.  x1² + x2² − 1 = 0
NcoProblem maratos_fletcher() {
  ProblemFunctions fn;
  fn.objective = [](const Vector& x) {
    return 2.0 * (x[0] * x[0] + x[1] * x[1] - 1.0) - x[0];
  };
  fn.objective_gradient = [](const Vector& x) {
    return vec({4.0 * x[0] - 1.0, 4.0 * x[1]});
  };
  fn.constraints = [](const Vector& x) {
    return vec({x[0] * x[0] + x[1] * x[1] - 1.0});
  };
  fn.constraint_jacobian = [](const Vector& x) {
    Matrix j(2, 1);
    j << 2.0 * x[0], 2.0 * x[1];
    return j;
  };
  fn.lagrangian_hessian = [](const Vector&, double rho, const Vector& lambda) {
    return Matrix((4.0 * rho - 2.0 * lambda[0]) * Matrix::Identity(2, 2));
  };
  // √2/2 rounded to nine digits, as in the published start point (h ≈ 5.3e−10).
  const double r = 0.707106781;
  NcoProblem p = make("maratos-fletcher", 2, 1, vec({r, r}), fn);
  // The Maratos setting: W = I at the start, so the full step overshoots
  // the curvature of the constraint.
  p.initial_multipliers = vec({1.5});
  return p;
}

// min 0  s.t.  1e4·x1·x2 − 1 = 0,  e^{−x1} + e^{−x2} − 1.0001 = 0
NcoProblem powellbs() {
  ProblemFunctions fn;
  fn.objective = [](const Vector&) { return 0.0; };
  fn.objective_gradient = [](const Vector&) { return Vector(Vector::Zero(2)); };
  fn.constraints = [](const Vector& x) {
    return vec({1e4 * x[0] * x[1] - 1.0,
                std::exp(-x[0]) + std::exp(-x[1]) - 1.0001});
  };
  fn.constraint_jacobian = [](const Vector& x) {
    Matrix j(2, 2);
    j << 1e4 * x[1], -std::exp(-x[0]),
         1e4 * x[0], -std::exp(-x[1]);
    return j;
  };
  fn.lagrangian_hessian = [](const Vector& x, double, const Vector& lambda) {
    Matrix w(2, 2);
    w << -lambda[1] * std::exp(-x[0]), -lambda[0] * 1e4,
         -lambda[0] * 1e4, -lambda[1] * std::exp(-x[1]);
    return w;
  };
  return make("powellbs", 2, 2, vec({0.0, 1.0}), fn);
}

// min x1² + x2²  s.t.  x1 + x2 − 1 = 0
NcoProblem circle() {
  ProblemFunctions fn;
  fn.objective = [](const Vector& x) { return x.squaredNorm(); };
  fn.objective_gradient = [](const Vector& x) { return Vector(2.0 * x); };
  fn.constraints = [](const Vector& x) { return vec({x[0] + x[1] - 1.0}); };
  fn.constraint_jacobian = [](const Vector&) { return Matrix(Matrix::Ones(2, 1)); };
  fn.lagrangian_hessian = [](const Vector&, double rho, const Vector&) {
    return Matrix(2.0 * rho * Matrix::Identity(2, 2));
  };
  return make("circle", 2, 1, vec({0.0, 0.0}), fn);
}

// min −x1 − 2x2  s.t.  x1 + x2 = 1.5,  0 ≤ x ≤ 1.  Solution (0.5, 1) with
// the upper bound of x2 active.
NcoProblem bounded_lp_like() {
  ProblemFunctions fn;
  fn.objective = [](const Vector& x) { return -x[0] - 2.0 * x[1]; };
  fn.objective_gradient = [](const Vector&) { return vec({-1.0, -2.0}); };
  fn.constraints = [](const Vector& x) { return vec({x[0] + x[1] - 1.5}); };
  fn.constraint_jacobian = [](const Vector&) { return Matrix(Matrix::Ones(2, 1)); };
  fn.lagrangian_hessian = [](const Vector&, double, const Vector&) {
    return Matrix(Matrix::Zero(2, 2));
  };
  NcoProblem p = make("bounded-lp-like", 2, 1, vec({0.0, 0.0}), fn);
  p.lower_bounds.setZero();
  p.upper_bounds.setOnes();
  return p;
}

// min (x1 − 1)² + x2²  s.t.  0.5 − e^{−x1} = 0,  x1 ≥ 0.  From x1 = 3 the
// linearization asks for x1 < 0, so the first QP is infeasible.
NcoProblem restoration_demo() {
  ProblemFunctions fn;
  fn.objective = [](const Vector& x) {
    return (x[0] - 1.0) * (x[0] - 1.0) + x[1] * x[1];
  };
  fn.objective_gradient = [](const Vector& x) {
    return vec({2.0 * (x[0] - 1.0), 2.0 * x[1]});
  };
  fn.constraints = [](const Vector& x) { return vec({0.5 - std::exp(-x[0])}); };
  fn.constraint_jacobian = [](const Vector& x) {
    Matrix j(2, 1);
    j << std::exp(-x[0]), 0.0;
    return j;
  };
  fn.lagrangian_hessian = [](const Vector& x, double rho, const Vector& lambda) {
    Matrix w = 2.0 * rho * Matrix::Identity(2, 2);
    w(0, 0) += lambda[0] * std::exp(-x[0]);
    return w;
  };
  NcoProblem p = make("restoration-demo", 2, 1, vec({3.0, 1.0}), fn);
  p.lower_bounds[0] = 0.0;
  return p;
}

// min 0  s.t.  x² + 1 = 0: no feasible point; x = 0 minimizes ‖c‖₁.
NcoProblem infeasible() {
  ProblemFunctions fn;
  fn.objective = [](const Vector&) { return 0.0; };
  fn.objective_gradient = [](const Vector&) { return Vector(Vector::Zero(1)); };
  fn.constraints = [](const Vector& x) { return vec({x[0] * x[0] + 1.0}); };
  fn.constraint_jacobian = [](const Vector& x) {
    return Matrix(Matrix::Constant(1, 1, 2.0 * x[0]));
  };
  fn.lagrangian_hessian = [](const Vector&, double, const Vector& lambda) {
    return Matrix(Matrix::Constant(1, 1, -2.0 * lambda[0]));
  };
  return make("infeasible", 1, 1, vec({1.0}), fn);
}

// min −x1⁴  s.t.  x2 − 1 = 0: feasible and unbounded below.
NcoProblem unbounded_quartic() {
  ProblemFunctions fn;
  fn.objective = [](const Vector& x) { return -std::pow(x[0], 4); };
  fn.objective_gradient = [](const Vector& x) {
    return vec({-4.0 * x[0] * x[0] * x[0], 0.0});
  };
  fn.constraints = [](const Vector& x) { return vec({x[1] - 1.0}); };
  fn.constraint_jacobian = [](const Vector&) {
    Matrix j = Matrix::Zero(2, 1);
    j(1, 0) = 1.0;
    return j;
  };
  fn.lagrangian_hessian = [](const Vector& x, double rho, const Vector&) {
    Matrix w = Matrix::Zero(2, 2);
    w(0, 0) = -12.0 * rho * x[0] * x[0];
    return w;
  };
  return make("unbounded-quartic", 2, 1, vec({1.0, 1.0}), fn);
}

// Hock–Schittkowski 6: min (1 − x1)²  s.t.  10(x2 − x1²) = 0.
NcoProblem hs006() {
  ProblemFunctions fn;
  fn.objective = [](const Vector& x) { return (1.0 - x[0]) * (1.0 - x[0]); };
  fn.objective_gradient = [](const Vector& x) {
    return vec({-2.0 * (1.0 - x[0]), 0.0});
  };
  fn.constraints = [](const Vector& x) { return vec({10.0 * (x[1] - x[0] * x[0])}); };
  fn.constraint_jacobian = [](const Vector& x) {
    Matrix j(2, 1);
    j << -20.0 * x[0], 10.0;
    return j;
  };
  fn.lagrangian_hessian = [](const Vector&, double rho, const Vector& lambda) {
    Matrix w = Matrix::Zero(2, 2);
    w(0, 0) = 2.0 * rho + 20.0 * lambda[0];
    return w;
  };
  return make("hs006", 2, 1, vec({-1.2, 1.0}), fn);
}

// Hock–Schittkowski 7: min log(1 + x1²) − x2  s.t.  (1 + x1²)² + x2² − 4 = 0.
NcoProblem hs007() {
  ProblemFunctions fn;
  fn.objective = [](const Vector& x) { return std::log(1.0 + x[0] * x[0]) - x[1]; };
  fn.objective_gradient = [](const Vector& x) {
    return vec({2.0 * x[0] / (1.0 + x[0] * x[0]), -1.0});
  };
  fn.constraints = [](const Vector& x) {
    const double a = 1.0 + x[0] * x[0];
    return vec({a * a + x[1] * x[1] - 4.0});
  };
  fn.constraint_jacobian = [](const Vector& x) {
    Matrix j(2, 1);
    j << 4.0 * x[0] * (1.0 + x[0] * x[0]), 2.0 * x[1];
    return j;
  };
  fn.lagrangian_hessian = [](const Vector& x, double rho, const Vector& lambda) {
    const double s = x[0] * x[0];
    Matrix w = Matrix::Zero(2, 2);
    w(0, 0) = rho * 2.0 * (1.0 - s) / ((1.0 + s) * (1.0 + s)) -
              lambda[0] * (4.0 + 12.0 * s);
    w(1, 1) = -lambda[0] * 2.0;
    return w;
  };
  return make("hs007", 2, 1, vec({2.0, 2.0}), fn);
}

// Hock–Schittkowski 39: min −x1  s.t.  x2 − x1³ − x3² = 0,  x1² − x2 − x4² = 0.
NcoProblem hs039() {
  ProblemFunctions fn;
  fn.objective = [](const Vector& x) { return -x[0]; };
  fn.objective_gradient = [](const Vector&) { return vec({-1.0, 0.0, 0.0, 0.0}); };
  fn.constraints = [](const Vector& x) {
    return vec({x[1] - x[0] * x[0] * x[0] - x[2] * x[2],
                x[0] * x[0] - x[1] - x[3] * x[3]});
  };
  fn.constraint_jacobian = [](const Vector& x) {
    Matrix j(4, 2);
    j << -3.0 * x[0] * x[0], 2.0 * x[0],
         1.0, -1.0,
         -2.0 * x[2], 0.0,
         0.0, -2.0 * x[3];
    return j;
  };
  fn.lagrangian_hessian = [](const Vector& x, double, const Vector& lambda) {
    Matrix w = Matrix::Zero(4, 4);
    w(0, 0) = -lambda[0] * (-6.0 * x[0]) - lambda[1] * 2.0;
    w(2, 2) = lambda[0] * 2.0;
    w(3, 3) = lambda[1] * 2.0;
    return w;
  };
  return make("hs039", 4, 2, vec({2.0, 2.0, 2.0, 2.0}), fn);
}

// Hock–Schittkowski 40: min −x1x2x3x4  s.t.  x1³ + x2² = 1,  x1²x4 − x3 = 0,
// x4² − x2 = 0.
NcoProblem hs040() {
  ProblemFunctions fn;
  fn.objective = [](const Vector& x) { return -x[0] * x[1] * x[2] * x[3]; };
  fn.objective_gradient = [](const Vector& x) {
    return vec({-x[1] * x[2] * x[3], -x[0] * x[2] * x[3], -x[0] * x[1] * x[3],
                -x[0] * x[1] * x[2]});
  };
  fn.constraints = [](const Vector& x) {
    return vec({x[0] * x[0] * x[0] + x[1] * x[1] - 1.0,
                x[0] * x[0] * x[3] - x[2], x[3] * x[3] - x[1]});
  };
  fn.constraint_jacobian = [](const Vector& x) {
    Matrix j(4, 3);
    j << 3.0 * x[0] * x[0], 2.0 * x[0] * x[3], 0.0,
         2.0 * x[1], 0.0, -1.0,
         0.0, -1.0, 0.0,
         0.0, x[0] * x[0], 2.0 * x[3];
    return j;
  };
  fn.lagrangian_hessian = [](const Vector& x, double rho, const Vector& lambda) {
    Matrix f(4, 4);
    f << 0.0, x[2] * x[3], x[1] * x[3], x[1] * x[2],
         x[2] * x[3], 0.0, x[0] * x[3], x[0] * x[2],
         x[1] * x[3], x[0] * x[3], 0.0, x[0] * x[1],
         x[1] * x[2], x[0] * x[2], x[0] * x[1], 0.0;
    Matrix w = -rho * f;
    w(0, 0) -= lambda[0] * 6.0 * x[0] + lambda[1] * 2.0 * x[3];
    w(1, 1) -= lambda[0] * 2.0;
    w(0, 3) -= lambda[1] * 2.0 * x[0];
    w(3, 0) -= lambda[1] * 2.0 * x[0];
    w(3, 3) -= lambda[2] * 2.0;
    return w;
  };
  return make("hs040", 4, 3, vec({0.8, 0.8, 0.8, 0.8}), fn);
}

// Hock–Schittkowski 71: min x1x4(x1 + x2 + x3) + x3
//   s.t. x1x2x3x4 ≥ 25,  Σ xᵢ² = 40,  1 ≤ x ≤ 5.
NcoProblem hs071() {
  GeneralProblem gp;
  gp.name = "hs071";
  gp.n_vars = 4;
  gp.n_cons = 2;
  gp.lower_bounds = Vector::Constant(4, 1.0);
  gp.upper_bounds = Vector::Constant(4, 5.0);
  gp.constraint_lower = vec({25.0, 40.0});
  gp.constraint_upper = vec({kInf, 40.0});
  gp.initial_point = vec({1.0, 5.0, 5.0, 1.0});
  gp.initial_multipliers = Vector::Zero(2);
  gp.variable_names = {"x1", "x2", "x3", "x4"};
  auto& fn = gp.functions;
  fn.objective = [](const Vector& x) {
    return x[0] * x[3] * (x[0] + x[1] + x[2]) + x[2];
  };
  fn.objective_gradient = [](const Vector& x) {
    return vec({x[3] * (2.0 * x[0] + x[1] + x[2]), x[0] * x[3], x[0] * x[3] + 1.0,
                x[0] * (x[0] + x[1] + x[2])});
  };
  fn.constraints = [](const Vector& x) {
    return vec({x[0] * x[1] * x[2] * x[3], x.squaredNorm()});
  };
  fn.constraint_jacobian = [](const Vector& x) {
    Matrix j(4, 2);
    j << x[1] * x[2] * x[3], 2.0 * x[0],
         x[0] * x[2] * x[3], 2.0 * x[1],
         x[0] * x[1] * x[3], 2.0 * x[2],
         x[0] * x[1] * x[2], 2.0 * x[3];
    return j;
  };
  fn.lagrangian_hessian = [](const Vector& x, double rho, const Vector& lambda) {
    Matrix hf(4, 4);
    hf << 2.0 * x[3], x[3], x[3], 2.0 * x[0] + x[1] + x[2],
          x[3], 0.0, 0.0, x[0],
          x[3], 0.0, 0.0, x[0],
          2.0 * x[0] + x[1] + x[2], x[0], x[0], 0.0;
    Matrix hc(4, 4);
    hc << 0.0, x[2] * x[3], x[1] * x[3], x[1] * x[2],
          x[2] * x[3], 0.0, x[0] * x[3], x[0] * x[2],
          x[1] * x[3], x[0] * x[3], 0.0, x[0] * x[1],
          x[1] * x[2], x[0] * x[2], x[0] * x[1], 0.0;
    return Matrix(rho * hf - lambda[0] * hc -
                  lambda[1] * 2.0 * Matrix::Identity(4, 4));
  };
  return to_standard_form(gp);
}

using Factory = NcoProblem (*)();

const std::vector<std::pair<std::string, Factory>>& registry() {
  static const std::vector<std::pair<std::string, Factory>> entries = {
      {"maratos-fletcher", maratos_fletcher},
      {"powellbs", powellbs},
      {"circle", circle},
      {"bounded-lp-like", bounded_lp_like},
      {"restoration-demo", restoration_demo},
      {"infeasible", infeasible},
      {"unbounded-quartic", unbounded_quartic},
      {"hs006", hs006},
      {"hs007", hs007},
      {"hs039", hs039},
      {"hs040", hs040},
      {"hs071", hs071},
  };
  return entries;
}

}  // namespace

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, factory] : registry()) out.push_back(name);
    return out;
  }();
  return names;
}

NcoProblem builtin(const std::string& name) {
  for (const auto& [key, factory] : registry()) {
    if (key == name) {
      NcoProblem p = factory();
      p.validate();
      return p;
    }
  }
  throw UnknownProblem(name);
}

}  // namespace funnel_sqp
