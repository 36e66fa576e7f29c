#include "funnel_sqp/expression.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <utility>

namespace funnel_sqp {

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += ", ";
    out += items[i];
  }
  return out;
}

std::string position(std::size_t line, std::size_t column) {
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

}  // namespace

SyntaxError::SyntaxError(std::size_t line, std::size_t column,
                         std::vector<std::string> expected, std::string found)
    : Error(position(line, column) + ": expected " + join(expected) +
            ", found " + found),
      line_(line),
      column_(column),
      expected_(std::move(expected)),
      found_(std::move(found)) {}

UndeclaredVariable::UndeclaredVariable(std::string name, std::size_t line,
                                       std::size_t column)
    : Error(position(line, column) + ": undeclared variable '" + name + "'"),
      name_(std::move(name)) {}

DuplicateDeclaration::DuplicateDeclaration(std::string name, std::size_t line,
                                           std::size_t column)
    : Error(position(line, column) + ": variable '" + name +
            "' is already declared"),
      name_(std::move(name)) {}

const char* to_string(Function fn) {
  switch (fn) {
    case Function::Exp:
      return "exp";
    case Function::Log:
      return "log";
    case Function::Sin:
      return "sin";
    case Function::Cos:
      return "cos";
    case Function::Sqrt:
      return "sqrt";
  }
  return "?";
}

ExprPtr Expr::number(double v) {
  auto e = std::make_shared<Expr>();
  e->kind = NodeKind::Number;
  e->value = v;
  return e;
}

ExprPtr Expr::var(std::size_t index) {
  auto e = std::make_shared<Expr>();
  e->kind = NodeKind::Variable;
  e->variable = index;
  e->constant = false;
  return e;
}

ExprPtr Expr::binary(NodeKind kind, ExprPtr lhs, ExprPtr rhs) {
  auto e = std::make_shared<Expr>();
  e->kind = kind;
  e->constant = lhs->constant && rhs->constant;
  e->args = {std::move(lhs), std::move(rhs)};
  return e;
}

ExprPtr Expr::negate(ExprPtr arg) {
  auto e = std::make_shared<Expr>();
  e->kind = NodeKind::Neg;
  e->constant = arg->constant;
  e->args = {std::move(arg)};
  return e;
}

ExprPtr Expr::call(Function fn, ExprPtr arg) {
  auto e = std::make_shared<Expr>();
  e->kind = NodeKind::Call;
  e->function = fn;
  e->constant = arg->constant;
  e->args = {std::move(arg)};
  return e;
}

double detail::constant_value(const Expr& expr) {
  return evaluate<double>(expr, {});
}

namespace {

enum class Tok {
  End,
  Ident,
  Number,
  Var,
  In,
  Minimize,
  SubjectTo,
  Inf,
  Func,
  Plus,
  Minus,
  Star,
  Slash,
  Caret,
  LParen,
  RParen,
  LBracket,
  RBracket,
  Comma,
  Semicolon,
  Assign,
  EqEq,
  Le,
  Ge,
};

const char* describe(Tok t) {
  switch (t) {
    case Tok::End:
      return "end of input";
    case Tok::Ident:
      return "identifier";
    case Tok::Number:
      return "number";
    case Tok::Var:
      return "'var'";
    case Tok::In:
      return "'in'";
    case Tok::Minimize:
      return "'minimize'";
    case Tok::SubjectTo:
      return "'subject_to'";
    case Tok::Inf:
      return "'inf'";
    case Tok::Func:
      return "function name";
    case Tok::Plus:
      return "'+'";
    case Tok::Minus:
      return "'-'";
    case Tok::Star:
      return "'*'";
    case Tok::Slash:
      return "'/'";
    case Tok::Caret:
      return "'^'";
    case Tok::LParen:
      return "'('";
    case Tok::RParen:
      return "')'";
    case Tok::LBracket:
      return "'['";
    case Tok::RBracket:
      return "']'";
    case Tok::Comma:
      return "','";
    case Tok::Semicolon:
      return "';'";
    case Tok::Assign:
      return "'='";
    case Tok::EqEq:
      return "'=='";
    case Tok::Le:
      return "'<='";
    case Tok::Ge:
      return "'>='";
  }
  return "?";
}

struct Token {
  Tok kind = Tok::End;
  std::string text;
  double number = 0.0;
  Function function = Function::Exp;
  std::size_t line = 1;
  std::size_t column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> tokenize() {
    std::vector<Token> out;
    for (;;) {
      skip_blank();
      Token t;
      t.line = line_;
      t.column = column_;
      if (pos_ >= text_.size()) {
        out.push_back(t);
        return out;
      }
      const char ch = text_[pos_];
      if (is_alpha(ch)) {
        lex_word(t);
      } else if (is_digit(ch) || (ch == '.' && pos_ + 1 < text_.size() &&
                                  is_digit(text_[pos_ + 1]))) {
        lex_number(t);
      } else {
        lex_symbol(t);
      }
      out.push_back(std::move(t));
    }
  }

 private:
  static bool is_alpha(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  }
  static bool is_digit(char c) { return c >= '0' && c <= '9'; }

  void advance() {
    const auto byte = static_cast<unsigned char>(text_[pos_]);
    ++pos_;
    if (byte == '\n') {
      ++line_;
      column_ = 1;
    } else if ((byte & 0xC0) != 0x80) {
      // count code points, not UTF-8 continuation bytes
      ++column_;
    }
  }

  void skip_blank() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else {
        return;
      }
    }
  }

  void lex_word(Token& t) {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (is_alpha(text_[pos_]) || is_digit(text_[pos_]))) {
      advance();
    }
    t.text = std::string(text_.substr(start, pos_ - start));
    static const std::unordered_map<std::string, Tok> keywords = {
        {"var", Tok::Var},
        {"in", Tok::In},
        {"minimize", Tok::Minimize},
        {"subject_to", Tok::SubjectTo},
        {"inf", Tok::Inf}};
    static const std::unordered_map<std::string, Function> functions = {
        {"exp", Function::Exp},
        {"log", Function::Log},
        {"sin", Function::Sin},
        {"cos", Function::Cos},
        {"sqrt", Function::Sqrt}};
    if (auto it = keywords.find(t.text); it != keywords.end()) {
      t.kind = it->second;
    } else if (auto fn = functions.find(t.text); fn != functions.end()) {
      t.kind = Tok::Func;
      t.function = fn->second;
    } else {
      t.kind = Tok::Ident;
    }
  }

  void lex_number(Token& t) {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && is_digit(text_[pos_])) advance();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      advance();
      while (pos_ < text_.size() && is_digit(text_[pos_])) advance();
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) {
        ++look;
      }
      if (look < text_.size() && is_digit(text_[look])) {
        while (pos_ < look) advance();
        while (pos_ < text_.size() && is_digit(text_[pos_])) advance();
      } else {
        throw SyntaxError(line_, column_, {"exponent digits"},
                          quote(look < text_.size() ? text_[look] : '\0'));
      }
    }
    t.kind = Tok::Number;
    t.text = std::string(text_.substr(start, pos_ - start));
    t.number = std::strtod(t.text.c_str(), nullptr);
  }

  void lex_symbol(Token& t) {
    const char c = text_[pos_];
    const char next = pos_ + 1 < text_.size() ? text_[pos_ + 1] : '\0';
    auto single = [&](Tok kind) {
      t.kind = kind;
      t.text = std::string(1, c);
      advance();
    };
    auto pair = [&](Tok kind) {
      t.kind = kind;
      t.text = std::string{c, next};
      advance();
      advance();
    };
    switch (c) {
      case '+':
        return single(Tok::Plus);
      case '-':
        return single(Tok::Minus);
      case '*':
        return single(Tok::Star);
      case '/':
        return single(Tok::Slash);
      case '^':
        return single(Tok::Caret);
      case '(':
        return single(Tok::LParen);
      case ')':
        return single(Tok::RParen);
      case '[':
        return single(Tok::LBracket);
      case ']':
        return single(Tok::RBracket);
      case ',':
        return single(Tok::Comma);
      case ';':
        return single(Tok::Semicolon);
      case '=':
        return next == '=' ? pair(Tok::EqEq) : single(Tok::Assign);
      case '<':
        if (next == '=') return pair(Tok::Le);
        break;
      case '>':
        if (next == '=') return pair(Tok::Ge);
        break;
      default:
        break;
    }
    throw SyntaxError(line_, column_, {"expression", "statement"}, quote(c));
  }

  static std::string quote(char c) {
    if (c == '\0') return "end of input";
    if (static_cast<unsigned char>(c) >= 0x80) return "non-ASCII character";
    return std::string("'") + c + "'";
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

class Parser {
 public:
  Parser(std::vector<Token> tokens, std::vector<VariableDecl>* variables)
      : tokens_(std::move(tokens)), variables_(variables) {}

  ProblemAst program() {
    ProblemAst ast;
    bool have_objective = false;
    while (peek().kind != Tok::End) {
      switch (peek().kind) {
        case Tok::Var:
          declaration();
          break;
        case Tok::Minimize: {
          const Token& kw = next();
          if (have_objective) {
            throw SyntaxError(kw.line, kw.column, {"'var'", "'subject_to'"},
                              "second 'minimize'");
          }
          ast.objective = expr();
          expect(Tok::Semicolon);
          have_objective = true;
          break;
        }
        case Tok::SubjectTo:
          next();
          ast.constraints.push_back(constraint());
          expect(Tok::Semicolon);
          break;
        default:
          fail({"'var'", "'minimize'", "'subject_to'", "end of input"});
      }
    }
    ast.variables = *variables_;
    if (!ast.objective) ast.objective = Expr::number(0.0);
    return ast;
  }

  ExprPtr single_expression() {
    ExprPtr e = expr();
    expect(Tok::End);
    return e;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& next() { return tokens_[pos_ < tokens_.size() - 1 ? pos_++ : pos_]; }

  [[noreturn]] void fail(std::vector<std::string> expected) const {
    const Token& t = peek();
    const std::string found =
        t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    throw SyntaxError(t.line, t.column, std::move(expected), found);
  }

  const Token& expect(Tok kind) {
    if (peek().kind != kind) fail({describe(kind)});
    return next();
  }

  double constant(const char* what) {
    const Token& start = peek();
    ExprPtr e = expr();
    if (!e->constant) {
      throw SyntaxError(start.line, start.column, {what}, "an expression with variables");
    }
    return detail::constant_value(*e);
  }

  void declaration() {
    next();
    const Token& name = expect(Tok::Ident);
    for (const auto& v : *variables_) {
      if (v.name == name.text) {
        throw DuplicateDeclaration(name.text, name.line, name.column);
      }
    }
    VariableDecl decl;
    decl.name = name.text;
    if (peek().kind == Tok::In) {
      next();
      expect(Tok::LBracket);
      decl.lower = constant("constant lower bound");
      expect(Tok::Comma);
      decl.upper = constant("constant upper bound");
      expect(Tok::RBracket);
    }
    if (peek().kind == Tok::Assign) {
      next();
      decl.initial = constant("constant initial value");
      decl.has_initial = true;
    }
    if (peek().kind != Tok::Semicolon) {
      std::vector<std::string> expected{"';'"};
      if (!decl.has_initial) expected.insert(expected.begin(), "'='");
      fail(expected);
    }
    next();
    variables_->push_back(std::move(decl));
  }

  static bool is_relation(Tok t) {
    return t == Tok::EqEq || t == Tok::Le || t == Tok::Ge;
  }

  ConstraintAst constraint() {
    ExprPtr lhs = expr();
    if (!is_relation(peek().kind)) fail({"'=='", "'<='", "'>='"});
    const Token first = next();
    ExprPtr mid = expr();
    ConstraintAst c;
    if (is_relation(peek().kind)) {
      const Token second = next();
      const Token rhs_start = peek();
      ExprPtr rhs = expr();
      const bool ascending = first.kind == Tok::Le && second.kind == Tok::Le;
      const bool descending = first.kind == Tok::Ge && second.kind == Tok::Ge;
      if (!ascending && !descending) {
        throw SyntaxError(second.line, second.column,
                          {describe(first.kind == Tok::Ge ? Tok::Ge : Tok::Le)},
                          "'" + second.text + "'");
      }
      if (!lhs->constant) {
        throw SyntaxError(first.line, first.column, {"constant outer bound"},
                          "an expression with variables");
      }
      if (!rhs->constant) {
        throw SyntaxError(rhs_start.line, rhs_start.column,
                          {"constant outer bound"},
                          "an expression with variables");
      }
      const double a = detail::constant_value(*lhs);
      const double b = detail::constant_value(*rhs);
      c.body = std::move(mid);
      c.relation = Relation::Ranged;
      c.lower = ascending ? a : b;
      c.upper = ascending ? b : a;
      return c;
    }
    // body on the left unless only the left side is constant
    Tok rel = first.kind;
    double bound = 0.0;
    if (mid->constant) {
      c.body = std::move(lhs);
      bound = detail::constant_value(*mid);
    } else if (lhs->constant) {
      c.body = std::move(mid);
      bound = detail::constant_value(*lhs);
      if (rel == Tok::Le) {
        rel = Tok::Ge;
      } else if (rel == Tok::Ge) {
        rel = Tok::Le;
      }
    } else {
      c.body = Expr::binary(NodeKind::Sub, std::move(lhs), std::move(mid));
    }
    switch (rel) {
      case Tok::EqEq:
        c.relation = Relation::Equal;
        c.lower = c.upper = bound;
        break;
      case Tok::Le:
        c.relation = Relation::LessEqual;
        c.lower = -kInf;
        c.upper = bound;
        break;
      default:
        c.relation = Relation::GreaterEqual;
        c.lower = bound;
        c.upper = kInf;
        break;
    }
    return c;
  }

  ExprPtr expr() {
    ExprPtr lhs = term();
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      const NodeKind kind = next().kind == Tok::Plus ? NodeKind::Add : NodeKind::Sub;
      lhs = Expr::binary(kind, std::move(lhs), term());
    }
    return lhs;
  }

  ExprPtr term() {
    ExprPtr lhs = unary();
    while (peek().kind == Tok::Star || peek().kind == Tok::Slash) {
      const NodeKind kind = next().kind == Tok::Star ? NodeKind::Mul : NodeKind::Div;
      lhs = Expr::binary(kind, std::move(lhs), unary());
    }
    return lhs;
  }

  ExprPtr unary() {
    if (peek().kind == Tok::Minus) {
      next();
      return Expr::negate(unary());
    }
    if (peek().kind == Tok::Plus) {
      next();
      return unary();
    }
    return power();
  }

  ExprPtr power() {
    ExprPtr base = primary();
    if (peek().kind == Tok::Caret) {
      next();
      return Expr::binary(NodeKind::Pow, std::move(base), unary());
    }
    return base;
  }

  ExprPtr primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Number:
        return Expr::number(next().number);
      case Tok::Inf:
        next();
        return Expr::number(kInf);
      case Tok::Ident: {
        const Token& id = next();
        for (std::size_t i = 0; i < variables_->size(); ++i) {
          if ((*variables_)[i].name == id.text) return Expr::var(i);
        }
        throw UndeclaredVariable(id.text, id.line, id.column);
      }
      case Tok::Func: {
        const Function fn = next().function;
        expect(Tok::LParen);
        ExprPtr arg = expr();
        expect(Tok::RParen);
        return Expr::call(fn, std::move(arg));
      }
      case Tok::LParen: {
        next();
        ExprPtr inner = expr();
        expect(Tok::RParen);
        return inner;
      }
      default:
        fail({"number", "identifier", "function name", "'('", "'-'"});
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::vector<VariableDecl>* variables_;
};

// Shortest decimal form that reads back to the same double.
std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

void print(const Expr& e, const std::vector<std::string>& names,
           std::string& out) {
  auto binary = [&](const char* op) {
    out += '(';
    print(*e.args[0], names, out);
    out += ' ';
    out += op;
    out += ' ';
    print(*e.args[1], names, out);
    out += ')';
  };
  switch (e.kind) {
    case NodeKind::Number:
      // negative literals only arise from constant folding outside the parser
      if (e.value < 0 || std::signbit(e.value)) {
        out += "(" + format_number(e.value) + ")";
      } else {
        out += format_number(e.value);
      }
      return;
    case NodeKind::Variable:
      out += names.at(e.variable);
      return;
    case NodeKind::Add:
      return binary("+");
    case NodeKind::Sub:
      return binary("-");
    case NodeKind::Mul:
      return binary("*");
    case NodeKind::Div:
      return binary("/");
    case NodeKind::Pow:
      return binary("^");
    case NodeKind::Neg:
      out += "(-";
      print(*e.args[0], names, out);
      out += ')';
      return;
    case NodeKind::Call:
      out += to_string(e.function);
      out += '(';
      print(*e.args[0], names, out);
      out += ')';
      return;
  }
}

std::vector<std::string> names_of(const std::vector<VariableDecl>& vars) {
  std::vector<std::string> names;
  names.reserve(vars.size());
  for (const auto& v : vars) names.push_back(v.name);
  return names;
}

bool same_double(double a, double b) {
  return a == b && std::signbit(a) == std::signbit(b);
}

}  // namespace

ProblemAst parse_problem(std::string_view text) {
  std::vector<VariableDecl> variables;
  Parser parser(Lexer(text).tokenize(), &variables);
  return parser.program();
}

ExprPtr parse_expression(std::string_view text,
                         const std::vector<std::string>& names) {
  std::vector<VariableDecl> variables;
  for (const auto& n : names) variables.push_back({n});
  Parser parser(Lexer(text).tokenize(), &variables);
  return parser.single_expression();
}

std::string print_expression(const Expr& expr,
                             const std::vector<std::string>& names) {
  std::string out;
  print(expr, names, out);
  return out;
}

std::string print_problem(const ProblemAst& ast) {
  const auto names = names_of(ast.variables);
  std::ostringstream out;
  for (const auto& v : ast.variables) {
    out << "var " << v.name;
    if (std::isfinite(v.lower) || std::isfinite(v.upper)) {
      out << " in [" << format_number(v.lower) << ", " << format_number(v.upper)
          << "]";
    }
    if (v.has_initial) out << " = " << format_number(v.initial);
    out << ";\n";
  }
  out << "minimize " << print_expression(*ast.objective, names) << ";\n";
  for (const auto& c : ast.constraints) {
    const std::string body = print_expression(*c.body, names);
    out << "subject_to ";
    switch (c.relation) {
      case Relation::Equal:
        out << body << " == " << format_number(c.lower);
        break;
      case Relation::LessEqual:
        out << body << " <= " << format_number(c.upper);
        break;
      case Relation::GreaterEqual:
        out << body << " >= " << format_number(c.lower);
        break;
      case Relation::Ranged:
        out << format_number(c.lower) << " <= " << body
            << " <= " << format_number(c.upper);
        break;
    }
    out << ";\n";
  }
  return out.str();
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.args.size() != b.args.size()) return false;
  switch (a.kind) {
    case NodeKind::Number:
      if (!same_double(a.value, b.value)) return false;
      break;
    case NodeKind::Variable:
      if (a.variable != b.variable) return false;
      break;
    case NodeKind::Call:
      if (a.function != b.function) return false;
      break;
    default:
      break;
  }
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!structurally_equal(*a.args[i], *b.args[i])) return false;
  }
  return true;
}

bool structurally_equal(const ProblemAst& a, const ProblemAst& b) {
  if (a.variables.size() != b.variables.size() ||
      a.constraints.size() != b.constraints.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.variables.size(); ++i) {
    const auto& u = a.variables[i];
    const auto& v = b.variables[i];
    if (u.name != v.name || !same_double(u.lower, v.lower) ||
        !same_double(u.upper, v.upper) || u.has_initial != v.has_initial ||
        (u.has_initial && !same_double(u.initial, v.initial))) {
      return false;
    }
  }
  if (!structurally_equal(*a.objective, *b.objective)) return false;
  for (std::size_t j = 0; j < a.constraints.size(); ++j) {
    const auto& p = a.constraints[j];
    const auto& q = b.constraints[j];
    if (p.relation != q.relation || !same_double(p.lower, q.lower) ||
        !same_double(p.upper, q.upper) ||
        !structurally_equal(*p.body, *q.body)) {
      return false;
    }
  }
  return true;
}

HyperDual<double> evaluate_hyperdual(const Expr& expr, const Vector& x,
                                     const Vector& dir1, const Vector& dir2) {
  std::vector<HyperDual<double>> seeded(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    seeded[static_cast<std::size_t>(i)] = {x[i], dir1[i], dir2[i], 0.0};
  }
  return evaluate(expr, seeded);
}

namespace {

using Dual = HyperDual<double>;

std::vector<Dual> unseeded(const Vector& x) {
  std::vector<Dual> out(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    out[static_cast<std::size_t>(i)] = Dual(x[i]);
  }
  return out;
}

std::vector<double> plain(const Vector& x) {
  return std::vector<double>(x.data(), x.data() + x.size());
}

// Gradient by one ε₁-seeded pass per coordinate.
void gradient_into(const Expr& e, const Vector& x, Eigen::Ref<Vector> out) {
  auto point = unseeded(x);
  for (std::size_t i = 0; i < point.size(); ++i) {
    if (e.constant) {
      out[static_cast<Eigen::Index>(i)] = 0.0;
      continue;
    }
    point[i].first1 = 1.0;
    out[static_cast<Eigen::Index>(i)] = evaluate(e, point).first1;
    point[i].first1 = 0.0;
  }
}

// Adds weight·∇²e into w from n(n+1)/2 seeded passes; both triangles get the
// same number so the result is exactly symmetric.
void add_hessian(const Expr& e, const Vector& x, double weight, Matrix& w) {
  if (weight == 0.0 || e.constant) return;
  auto point = unseeded(x);
  const std::size_t n = point.size();
  for (std::size_t i = 0; i < n; ++i) {
    point[i].first1 = 1.0;
    for (std::size_t j = i; j < n; ++j) {
      point[j].first2 = 1.0;
      const double hij = weight * evaluate(e, point).second;
      point[j].first2 = 0.0;
      const auto r = static_cast<Eigen::Index>(i);
      const auto c = static_cast<Eigen::Index>(j);
      w(r, c) += hij;
      if (i != j) w(c, r) += hij;
    }
    point[i].first1 = 0.0;
  }
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

NcoProblem lower_to_problem(const ProblemAst& ast, std::string name) {
  GeneralProblem gp;
  gp.name = std::move(name);
  gp.n_vars = ast.variables.size();
  gp.n_cons = ast.constraints.size();
  const auto n = static_cast<Eigen::Index>(gp.n_vars);
  const auto m = static_cast<Eigen::Index>(gp.n_cons);
  gp.lower_bounds.resize(n);
  gp.upper_bounds.resize(n);
  gp.initial_point.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& v = ast.variables[static_cast<std::size_t>(i)];
    gp.lower_bounds[i] = v.lower;
    gp.upper_bounds[i] = v.upper;
    gp.initial_point[i] = v.initial;
    gp.variable_names.push_back(v.name);
  }
  gp.constraint_lower.resize(m);
  gp.constraint_upper.resize(m);
  std::vector<ExprPtr> bodies;
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto& c = ast.constraints[static_cast<std::size_t>(j)];
    gp.constraint_lower[j] = c.lower;
    gp.constraint_upper[j] = c.upper;
    bodies.push_back(c.body);
  }
  gp.initial_multipliers = Vector::Zero(m);
  const ExprPtr objective = ast.objective;

  gp.functions.objective = [objective](const Vector& x) {
    try {
      return evaluate<double>(*objective, plain(x));
    } catch (const DomainError&) {
      return kNaN;
    }
  };
  gp.functions.objective_gradient = [objective](const Vector& x) {
    Vector g(x.size());
    try {
      gradient_into(*objective, x, g);
    } catch (const DomainError&) {
      g.setConstant(kNaN);
    }
    return g;
  };
  gp.functions.constraints = [bodies](const Vector& x) {
    Vector c(static_cast<Eigen::Index>(bodies.size()));
    const auto point = plain(x);
    for (std::size_t j = 0; j < bodies.size(); ++j) {
      try {
        c[static_cast<Eigen::Index>(j)] = evaluate<double>(*bodies[j], point);
      } catch (const DomainError&) {
        c[static_cast<Eigen::Index>(j)] = kNaN;
      }
    }
    return c;
  };
  gp.functions.constraint_jacobian = [bodies](const Vector& x) {
    Matrix jac(x.size(), static_cast<Eigen::Index>(bodies.size()));
    for (std::size_t j = 0; j < bodies.size(); ++j) {
      auto col = jac.col(static_cast<Eigen::Index>(j));
      try {
        gradient_into(*bodies[j], x, col);
      } catch (const DomainError&) {
        col.setConstant(kNaN);
      }
    }
    return jac;
  };
  gp.functions.lagrangian_hessian = [objective, bodies](
                                        const Vector& x, double rho,
                                        const Vector& lambda) {
    Matrix w = Matrix::Zero(x.size(), x.size());
    try {
      add_hessian(*objective, x, rho, w);
      for (std::size_t j = 0; j < bodies.size(); ++j) {
        add_hessian(*bodies[j], x, -lambda[static_cast<Eigen::Index>(j)], w);
      }
    } catch (const DomainError&) {
      w.setConstant(kNaN);
    }
    return w;
  };
  NcoProblem p = to_standard_form(gp);
  p.validate();
  return p;
}

NcoProblem load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read model file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return lower_to_problem(parse_problem(buffer.str()), path.stem().string());
}

}  // namespace funnel_sqp
