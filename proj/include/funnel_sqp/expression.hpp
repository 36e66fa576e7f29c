#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "funnel_sqp/common.hpp"
#include "funnel_sqp/hyper_dual.hpp"
#include "funnel_sqp/problem.hpp"

namespace funnel_sqp {

/// Malformed model text. Carries the 1-based position and the tokens that
/// would have been accepted there.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t line, std::size_t column,
              std::vector<std::string> expected, std::string found);

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::vector<std::string>& expected() const { return expected_; }
  const std::string& found() const { return found_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::vector<std::string> expected_;
  std::string found_;
};

class UndeclaredVariable : public Error {
 public:
  UndeclaredVariable(std::string name, std::size_t line, std::size_t column);
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class DuplicateDeclaration : public Error {
 public:
  DuplicateDeclaration(std::string name, std::size_t line, std::size_t column);
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

/// log or sqrt of a negative argument, division by zero, or a power that is
/// not real.
class DomainError : public Error {
 public:
  using Error::Error;
};

enum class NodeKind { Number, Variable, Add, Sub, Mul, Div, Pow, Neg, Call };
enum class Function { Exp, Log, Sin, Cos, Sqrt };

const char* to_string(Function fn);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Immutable expression node. `constant` is true when no variable occurs in
/// the subtree.
struct Expr {
  NodeKind kind = NodeKind::Number;
  double value = 0.0;        // Number
  std::size_t variable = 0;  // Variable
  Function function = Function::Exp;  // Call
  std::vector<ExprPtr> args;
  bool constant = true;

  static ExprPtr number(double v);
  static ExprPtr var(std::size_t index);
  static ExprPtr binary(NodeKind kind, ExprPtr lhs, ExprPtr rhs);
  static ExprPtr negate(ExprPtr arg);
  static ExprPtr call(Function fn, ExprPtr arg);
};

struct VariableDecl {
  std::string name;
  double lower = -kInf;
  double upper = kInf;
  double initial = 0.0;
  bool has_initial = false;
};

enum class Relation { Equal, LessEqual, GreaterEqual, Ranged };

/// Constraint normalized to lower ≤ body ≤ upper. `relation` remembers the
/// written form for printing.
struct ConstraintAst {
  ExprPtr body;
  Relation relation = Relation::Equal;
  double lower = 0.0;
  double upper = 0.0;
};

struct ProblemAst {
  std::vector<VariableDecl> variables;
  ExprPtr objective;  // never null; 0 when no minimize statement is given
  std::vector<ConstraintAst> constraints;
};

/// Grammar:
///   program    := { statement }
///   statement  := 'var' IDENT [ 'in' '[' expr ',' expr ']' ] [ '=' expr ] ';'
///               | 'minimize' expr ';'
///               | 'subject_to' expr rel expr [ rel expr ] ';'
///   rel        := '==' | '<=' | '>='
///   expr       := term { ('+' | '-') term }
///   term       := unary { ('*' | '/') unary }
///   unary      := ('-' | '+') unary | power
///   power      := primary [ '^' unary ]
///   primary    := NUMBER | 'inf' | IDENT | FUNC '(' expr ')' | '(' expr ')'
/// Bounds, initial values and the outer terms of a ranged constraint must be
/// constant. `#` starts a comment that runs to the end of the line.
ProblemAst parse_problem(std::string_view text);

/// Parses a single expression over the given variable names.
ExprPtr parse_expression(std::string_view text,
                         const std::vector<std::string>& names);

/// Canonical text that parses back to a structurally identical AST.
std::string print_problem(const ProblemAst& ast);
std::string print_expression(const Expr& expr,
                             const std::vector<std::string>& names);

bool structurally_equal(const Expr& a, const Expr& b);
bool structurally_equal(const ProblemAst& a, const ProblemAst& b);

namespace detail {

inline double value_of(double v) { return v; }
inline double value_of(const HyperDual<double>& v) { return v.value; }

template <typename T>
T apply(Function fn, const T& a) {
  using std::cos;
  using std::exp;
  using std::log;
  using std::sin;
  using std::sqrt;
  const double v = value_of(a);
  switch (fn) {
    case Function::Exp:
      return exp(a);
    case Function::Log:
      if (!(v > 0.0)) throw DomainError("log of a non-positive argument");
      return log(a);
    case Function::Sin:
      return sin(a);
    case Function::Cos:
      return cos(a);
    case Function::Sqrt:
      if (v < 0.0) throw DomainError("sqrt of a negative argument");
      return sqrt(a);
  }
  return a;
}

double constant_value(const Expr& expr);

}  // namespace detail

/// Interprets the tree with T = double or HyperDual<double>.
template <typename T>
T evaluate(const Expr& e, const std::vector<T>& x) {
  using detail::value_of;
  switch (e.kind) {
    case NodeKind::Number:
      return T(e.value);
    case NodeKind::Variable:
      return x[e.variable];
    case NodeKind::Add:
      return evaluate(*e.args[0], x) + evaluate(*e.args[1], x);
    case NodeKind::Sub:
      return evaluate(*e.args[0], x) - evaluate(*e.args[1], x);
    case NodeKind::Mul:
      return evaluate(*e.args[0], x) * evaluate(*e.args[1], x);
    case NodeKind::Div: {
      const T den = evaluate(*e.args[1], x);
      if (value_of(den) == 0.0) throw DomainError("division by zero");
      return evaluate(*e.args[0], x) / den;
    }
    case NodeKind::Neg:
      return -evaluate(*e.args[0], x);
    case NodeKind::Call:
      return detail::apply(e.function, evaluate(*e.args[0], x));
    case NodeKind::Pow: {
      using std::pow;
      const T base = evaluate(*e.args[0], x);
      const double b = value_of(base);
      if (e.args[1]->constant) {
        const double p = detail::constant_value(*e.args[1]);
        if (b < 0.0 && p != std::floor(p)) {
          throw DomainError("fractional power of a negative base");
        }
        if (b == 0.0 && p < 0.0) throw DomainError("division by zero");
        return pow(base, p);
      }
      if (!(b > 0.0)) throw DomainError("variable power of a non-positive base");
      return pow(base, evaluate(*e.args[1], x));
    }
  }
  return T(0.0);
}

/// Value, ∇f·dir1, ∇f·dir2 and dir1ᵀ∇²f dir2 at x. Throws DomainError.
HyperDual<double> evaluate_hyperdual(const Expr& expr, const Vector& x,
                                     const Vector& dir1, const Vector& dir2);

/// Evaluators interpret the AST; a DomainError during evaluation yields NaN
/// so that the solver sees a non-finite value.
NcoProblem lower_to_problem(const ProblemAst& ast, std::string name = "model");

/// Reads, parses and lowers a `.nco` file; the problem is named after the
/// file stem. Throws std::runtime_error when the file cannot be read.
NcoProblem load_model(const std::filesystem::path& path);

}  // namespace funnel_sqp
