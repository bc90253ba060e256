#pragma once

// Small expression language over chart variables: q1..qn (base), p1..pm or
// a1..am (fiber), and t. Supports + - * / ^, unary minus, sin cos exp sqrt log,
// and the constant pi. Expressions are immutable trees with shared nodes;
// the smart constructors fold constants and drop trivial identities.

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <numbers>
#include <span>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "errors.hpp"

namespace lp {

enum class VarKind { Base, Fiber, Time };

/// A chart variable. `index` is 0-based; the printed name is 1-based.
struct Variable {
  VarKind kind = VarKind::Base;
  int index = 0;
  char fiber_letter = 'p';

  std::string name() const {
    switch (kind) {
      case VarKind::Base: return "q" + std::to_string(index + 1);
      case VarKind::Fiber: return std::string(1, fiber_letter) + std::to_string(index + 1);
      case VarKind::Time: return "t";
    }
    return "?";
  }
  friend bool operator==(const Variable& a, const Variable& b) {
    return a.kind == b.kind && (a.kind == VarKind::Time || a.index == b.index);
  }
};

inline Variable base_var(int i) { return {VarKind::Base, i, 'p'}; }
inline Variable fiber_var(int i, char letter = 'p') { return {VarKind::Fiber, i, letter}; }
inline Variable time_var() { return {VarKind::Time, 0, 'p'}; }

/// Names an expression may refer to.
struct Scope {
  int base_dim = 0;
  int fiber_dim = 0;
  char fiber_letter = 'p';
  bool allow_time = true;
};

/// Values bound to the variables at evaluation time.
struct EvalPoint {
  std::span<const double> q;
  std::span<const double> fiber;
  double t = 0.0;
};

class Expr {
 public:
  enum class Op { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp, Sqrt, Log };

  Expr() : Expr(constant(0.0)) {}

  static Expr constant(double c) { return Expr(std::make_shared<const Node>(Node{Op::Const, c, {}, {}, {}})); }
  static Expr variable(Variable v) { return Expr(std::make_shared<const Node>(Node{Op::Var, 0.0, v, {}, {}})); }

  Op op() const { return node_->op; }
  double value() const { return node_->value; }
  const Variable& var() const { return node_->var; }
  const Expr& lhs() const { return *node_->a; }
  const Expr& rhs() const { return *node_->b; }

  bool is_const() const { return op() == Op::Const; }
  bool is_const(double c) const { return is_const() && value() == c; }
  bool is_zero() const { return is_const(0.0); }

  double eval(const EvalPoint& p) const;

  friend Expr operator-(const Expr& a);
  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr pow(const Expr& a, const Expr& b);
  friend Expr sin(const Expr& a);
  friend Expr cos(const Expr& a);
  friend Expr exp(const Expr& a);
  friend Expr sqrt(const Expr& a);
  friend Expr log(const Expr& a);

  friend Expr operator+(const Expr& a, double b) { return a + constant(b); }
  friend Expr operator+(double a, const Expr& b) { return constant(a) + b; }
  friend Expr operator-(const Expr& a, double b) { return a - constant(b); }
  friend Expr operator-(double a, const Expr& b) { return constant(a) - b; }
  friend Expr operator*(const Expr& a, double b) { return a * constant(b); }
  friend Expr operator*(double a, const Expr& b) { return constant(a) * b; }
  friend Expr operator/(const Expr& a, double b) { return a / constant(b); }
  friend Expr pow(const Expr& a, double b) { return pow(a, constant(b)); }

  Expr& operator+=(const Expr& o) { return *this = *this + o; }
  Expr& operator-=(const Expr& o) { return *this = *this - o; }
  Expr& operator*=(const Expr& o) { return *this = *this * o; }

 private:
  struct Node {
    Op op;
    double value;
    Variable var;
    std::shared_ptr<const Expr> a;
    std::shared_ptr<const Expr> b;
  };

  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static Expr make(Op op, const Expr& a) {
    return Expr(std::make_shared<const Node>(Node{op, 0.0, {}, std::make_shared<const Expr>(a), {}}));
  }
  static Expr make(Op op, const Expr& a, const Expr& b) {
    return Expr(std::make_shared<const Node>(
        Node{op, 0.0, {}, std::make_shared<const Expr>(a), std::make_shared<const Expr>(b)}));
  }

  std::shared_ptr<const Node> node_;
};

inline Expr operator-(const Expr& a) {
  if (a.is_const()) return Expr::constant(-a.value());
  if (a.op() == Expr::Op::Neg) return a.lhs();
  return Expr::make(Expr::Op::Neg, a);
}

inline Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_const() && b.is_const()) return Expr::constant(a.value() + b.value());
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  if (b.op() == Expr::Op::Neg) return a - b.lhs();
  return Expr::make(Expr::Op::Add, a, b);
}

inline Expr operator-(const Expr& a, const Expr& b) {
  if (a.is_const() && b.is_const()) return Expr::constant(a.value() - b.value());
  if (b.is_zero()) return a;
  if (a.is_zero()) return -b;
  if (b.op() == Expr::Op::Neg) return a + b.lhs();
  return Expr::make(Expr::Op::Sub, a, b);
}

inline Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_const() && b.is_const()) return Expr::constant(a.value() * b.value());
  if (a.is_zero() || b.is_zero()) return Expr::constant(0.0);
  if (a.is_const(1.0)) return b;
  if (b.is_const(1.0)) return a;
  if (a.is_const(-1.0)) return -b;
  if (b.is_const(-1.0)) return -a;
  return Expr::make(Expr::Op::Mul, a, b);
}

inline Expr operator/(const Expr& a, const Expr& b) {
  if (a.is_const() && b.is_const() && b.value() != 0.0) return Expr::constant(a.value() / b.value());
  if (a.is_zero() && !(b.is_zero())) return Expr::constant(0.0);
  if (b.is_const(1.0)) return a;
  return Expr::make(Expr::Op::Div, a, b);
}

inline Expr pow(const Expr& a, const Expr& b) {
  if (a.is_const() && b.is_const()) return Expr::constant(std::pow(a.value(), b.value()));
  if (b.is_zero()) return Expr::constant(1.0);
  if (b.is_const(1.0)) return a;
  return Expr::make(Expr::Op::Pow, a, b);
}

inline Expr sin(const Expr& a) {
  return a.is_const() ? Expr::constant(std::sin(a.value())) : Expr::make(Expr::Op::Sin, a);
}
inline Expr cos(const Expr& a) {
  return a.is_const() ? Expr::constant(std::cos(a.value())) : Expr::make(Expr::Op::Cos, a);
}
inline Expr exp(const Expr& a) {
  return a.is_const() ? Expr::constant(std::exp(a.value())) : Expr::make(Expr::Op::Exp, a);
}
inline Expr sqrt(const Expr& a) {
  return a.is_const() ? Expr::constant(std::sqrt(a.value())) : Expr::make(Expr::Op::Sqrt, a);
}
inline Expr log(const Expr& a) {
  return a.is_const() ? Expr::constant(std::log(a.value())) : Expr::make(Expr::Op::Log, a);
}

inline double Expr::eval(const EvalPoint& p) const {
  switch (op()) {
    case Op::Const: return value();
    case Op::Var:
      switch (var().kind) {
        case VarKind::Base: return p.q[static_cast<std::size_t>(var().index)];
        case VarKind::Fiber: return p.fiber[static_cast<std::size_t>(var().index)];
        case VarKind::Time: return p.t;
      }
      return 0.0;
    case Op::Neg: return -lhs().eval(p);
    case Op::Add: return lhs().eval(p) + rhs().eval(p);
    case Op::Sub: return lhs().eval(p) - rhs().eval(p);
    case Op::Mul: return lhs().eval(p) * rhs().eval(p);
    case Op::Div: return lhs().eval(p) / rhs().eval(p);
    case Op::Pow: {
      const Expr& e = rhs();
      const double base = lhs().eval(p);
      if (e.is_const(2.0)) return base * base;
      return std::pow(base, e.eval(p));
    }
    case Op::Sin: return std::sin(lhs().eval(p));
    case Op::Cos: return std::cos(lhs().eval(p));
    case Op::Exp: return std::exp(lhs().eval(p));
    case Op::Sqrt: return std::sqrt(lhs().eval(p));
    case Op::Log: return std::log(lhs().eval(p));
  }
  return 0.0;
}

/// Symbolic derivative, constant-folded by the smart constructors.
inline Expr differentiate(const Expr& e, const Variable& v) {
  using Op = Expr::Op;
  switch (e.op()) {
    case Op::Const: return Expr::constant(0.0);
    case Op::Var: return Expr::constant(e.var() == v ? 1.0 : 0.0);
    case Op::Neg: return -differentiate(e.lhs(), v);
    case Op::Add: return differentiate(e.lhs(), v) + differentiate(e.rhs(), v);
    case Op::Sub: return differentiate(e.lhs(), v) - differentiate(e.rhs(), v);
    case Op::Mul:
      return differentiate(e.lhs(), v) * e.rhs() + e.lhs() * differentiate(e.rhs(), v);
    case Op::Div: {
      const Expr da = differentiate(e.lhs(), v);
      const Expr db = differentiate(e.rhs(), v);
      if (db.is_zero()) return da / e.rhs();
      return (da * e.rhs() - e.lhs() * db) / (e.rhs() * e.rhs());
    }
    case Op::Pow: {
      const Expr& a = e.lhs();
      const Expr& b = e.rhs();
      const Expr da = differentiate(a, v);
      if (b.is_const()) return b * pow(a, b.value() - 1.0) * da;
      const Expr db = differentiate(b, v);
      return e * (db * log(a) + b * da / a);
    }
    case Op::Sin: return cos(e.lhs()) * differentiate(e.lhs(), v);
    case Op::Cos: return -sin(e.lhs()) * differentiate(e.lhs(), v);
    case Op::Exp: return e * differentiate(e.lhs(), v);
    case Op::Sqrt: return differentiate(e.lhs(), v) / (2.0 * e);
    case Op::Log: return differentiate(e.lhs(), v) / e.lhs();
  }
  return Expr::constant(0.0);
}

namespace detail {

inline int precedence(const Expr& e) {
  using Op = Expr::Op;
  switch (e.op()) {
    case Op::Add:
    case Op::Sub: return 1;
    case Op::Mul:
    case Op::Div: return 2;
    case Op::Neg: return 3;
    case Op::Pow: return 4;
    case Op::Const: return e.value() < 0.0 || std::signbit(e.value()) ? 3 : 5;
    default: return 5;
  }
}

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string wrap(const std::string& s, bool parens) { return parens ? "(" + s + ")" : s; }

}  // namespace detail

/// Prints an expression in the syntax accepted by parse_expression. The
/// printed text parses back to a tree with identical values.
inline std::string to_string(const Expr& e) {
  using Op = Expr::Op;
  using detail::precedence;
  using detail::wrap;
  switch (e.op()) {
    case Op::Const: return detail::format_number(e.value());
    case Op::Var: return e.var().name();
    case Op::Neg: return "-" + wrap(to_string(e.lhs()), precedence(e.lhs()) < 3);
    case Op::Add:
    case Op::Sub: {
      const char* sym = e.op() == Op::Add ? "+" : "-";
      return to_string(e.lhs()) + sym + wrap(to_string(e.rhs()), precedence(e.rhs()) <= 1);
    }
    case Op::Mul:
    case Op::Div: {
      const char* sym = e.op() == Op::Mul ? "*" : "/";
      return wrap(to_string(e.lhs()), precedence(e.lhs()) < 2) + sym +
             wrap(to_string(e.rhs()), precedence(e.rhs()) <= 2);
    }
    case Op::Pow:
      return wrap(to_string(e.lhs()), precedence(e.lhs()) <= 4) + "^" +
             wrap(to_string(e.rhs()), precedence(e.rhs()) < 3);
    case Op::Sin: return "sin(" + to_string(e.lhs()) + ")";
    case Op::Cos: return "cos(" + to_string(e.lhs()) + ")";
    case Op::Exp: return "exp(" + to_string(e.lhs()) + ")";
    case Op::Sqrt: return "sqrt(" + to_string(e.lhs()) + ")";
    case Op::Log: return "log(" + to_string(e.lhs()) + ")";
  }
  return "?";
}

namespace detail {

// Recursive-descent parser.
//   expr  := term (('+'|'-') term)*
//   term  := unary (('*'|'/') unary)*
//   unary := '-' unary | power
//   power := primary ('^' unary)?
class Parser {
 public:
  Parser(std::string_view src, const Scope& scope) : src_(src), scope_(scope) {}

  Expr parse() {
    Expr e = parse_expr();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_); }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  Expr parse_expr() {
    Expr e = parse_term();
    for (;;) {
      if (accept('+')) e = Expr(e) + parse_term();
      else if (accept('-')) e = Expr(e) - parse_term();
      else return e;
    }
  }

  Expr parse_term() {
    Expr e = parse_unary();
    for (;;) {
      if (accept('*')) e = e * parse_unary();
      else if (accept('/')) e = e / parse_unary();
      else return e;
    }
  }

  Expr parse_unary() {
    if (accept('-')) return -parse_unary();
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (accept('^')) return pow(base, parse_unary());
    return base;
  }

  Expr parse_primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = parse_expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    };
    digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) digits();
      else pos_ = save;
    }
    const std::string text(src_.substr(start, pos_ - start));
    if (text == ".") {
      pos_ = start;
      fail("malformed number");
    }
    return Expr::constant(std::strtod(text.c_str(), nullptr));
  }

  Expr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    const std::string name(src_.substr(start, pos_ - start));

    using Fn = Expr (*)(const Expr&);
    static constexpr std::pair<std::string_view, Fn> functions[] = {
        {"sin", [](const Expr& a) { return sin(a); }},   {"cos", [](const Expr& a) { return cos(a); }},
        {"exp", [](const Expr& a) { return exp(a); }},   {"sqrt", [](const Expr& a) { return sqrt(a); }},
        {"log", [](const Expr& a) { return log(a); }},
    };
    for (const auto& [fname, fn] : functions) {
      if (name == fname) {
        expect('(');
        Expr arg = parse_expr();
        expect(')');
        return fn(arg);
      }
    }
    if (name == "pi") return Expr::constant(std::numbers::pi);
    if (name == "t" && scope_.allow_time) return Expr::variable(time_var());

    auto indexed = [&](char letter, int dim, VarKind kind) -> std::optional<Expr> {
      if (name.size() < 2 || name[0] != letter) return std::nullopt;
      for (std::size_t k = 1; k < name.size(); ++k)
        if (!std::isdigit(static_cast<unsigned char>(name[k]))) return std::nullopt;
      if (name[1] == '0') return std::nullopt;
      const long idx = std::strtol(name.c_str() + 1, nullptr, 10);
      if (idx < 1 || idx > dim) return std::nullopt;
      return Expr::variable({kind, static_cast<int>(idx - 1), scope_.fiber_letter});
    };
    if (auto v = indexed('q', scope_.base_dim, VarKind::Base)) return *v;
    if (auto v = indexed(scope_.fiber_letter, scope_.fiber_dim, VarKind::Fiber)) return *v;

    pos_ = start;
    fail("unknown identifier '" + name + "'");
  }

  std::string_view src_;
  Scope scope_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses `src` against the variables declared by `scope`.
inline Expr parse_expression(std::string_view src, const Scope& scope) {
  return detail::Parser(src, scope).parse();
}

inline double evaluate(const Expr& e, std::span<const double> q, std::span<const double> fiber,
                       double t = 0.0) {
  return e.eval({q, fiber, t});
}

/// True when `e` references no variable of the given kind.
inline bool depends_on(const Expr& e, VarKind kind) {
  using Op = Expr::Op;
  switch (e.op()) {
    case Op::Const: return false;
    case Op::Var: return e.var().kind == kind;
    case Op::Neg:
    case Op::Sin:
    case Op::Cos:
    case Op::Exp:
    case Op::Sqrt:
    case Op::Log: return depends_on(e.lhs(), kind);
    default: return depends_on(e.lhs(), kind) || depends_on(e.rhs(), kind);
  }
}

}  // namespace lp
