#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "expression.hpp"
#include "tensor.hpp"

namespace lp {

inline std::span<const double> as_span(const Vec& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

/// Central-difference step for coordinate x: 1e-6 * max(1, |x|).
inline double fd_step(double x) { return 1e-6 * std::max(1.0, std::abs(x)); }

/// Central-difference gradient of a scalar function of one vector argument.
template <class F>
Vec fd_gradient(const F& f, const Vec& x) {
  Vec g(x.size());
  Vec xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = fd_step(x[i]);
    xp[i] = x[i] + h;
    const double fp = f(xp);
    xp[i] = x[i] - h;
    const double fm = f(xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

enum class DerivativeMode { Exact, FiniteDifference };

/// A scalar function of a base point q ∈ R^n and a fiber point (μ ∈ A*_q or
/// a ∈ A_q) ∈ R^m, together with its partial derivatives. Hamiltonians,
/// Lagrangians, potentials and observables are all ScalarFields.
///
/// Three flavours:
///  - expression-backed: exact symbolic partials, and the expression itself is
///    available for further symbolic work (nested brackets);
///  - callable with supplied partials (exact);
///  - callable only: partials by central differences.
class ScalarField {
 public:
  using ValueFn = std::function<double(const Vec& q, const Vec& fiber)>;
  using GradFn = std::function<Vec(const Vec& q, const Vec& fiber)>;

  ScalarField() = default;

  static ScalarField from_expression(const Expr& e, int base_dim, int fiber_dim) {
    auto sym = std::make_shared<Symbolic>();
    sym->expr = e;
    for (int i = 0; i < base_dim; ++i) sym->dq.push_back(differentiate(e, base_var(i)));
    for (int I = 0; I < fiber_dim; ++I) sym->dfiber.push_back(differentiate(e, fiber_var(I)));
    ScalarField f;
    f.n_ = base_dim;
    f.m_ = fiber_dim;
    f.mode_ = DerivativeMode::Exact;
    f.value_ = [sym](const Vec& q, const Vec& x) { return sym->expr.eval({as_span(q), as_span(x), 0.0}); };
    f.dq_ = [sym](const Vec& q, const Vec& x) { return eval_all(sym->dq, q, x); };
    f.dfiber_ = [sym](const Vec& q, const Vec& x) { return eval_all(sym->dfiber, q, x); };
    f.symbolic_ = std::move(sym);
    return f;
  }

  static ScalarField from_function(int base_dim, int fiber_dim, ValueFn value) {
    ScalarField f;
    f.n_ = base_dim;
    f.m_ = fiber_dim;
    f.mode_ = DerivativeMode::FiniteDifference;
    f.value_ = std::move(value);
    return f;
  }

  static ScalarField from_function(int base_dim, int fiber_dim, ValueFn value, GradFn dq, GradFn dfiber) {
    ScalarField f = from_function(base_dim, fiber_dim, std::move(value));
    f.mode_ = DerivativeMode::Exact;
    f.dq_ = std::move(dq);
    f.dfiber_ = std::move(dfiber);
    return f;
  }

  static ScalarField constant(int base_dim, int fiber_dim, double c) {
    return from_expression(Expr::constant(c), base_dim, fiber_dim);
  }

  int base_dim() const { return n_; }
  int fiber_dim() const { return m_; }
  DerivativeMode derivative_mode() const { return mode_; }
  bool valid() const { return static_cast<bool>(value_); }

  /// The defining expression, when the field is expression-backed.
  const Expr* expression() const { return symbolic_ ? &symbolic_->expr : nullptr; }

  double operator()(const Vec& q, const Vec& fiber) const {
    check_dims(q, fiber);
    return value_(q, fiber);
  }

  /// ∂F/∂q^i.
  Vec dq(const Vec& q, const Vec& fiber) const {
    check_dims(q, fiber);
    if (dq_) return dq_(q, fiber);
    return fd_gradient([&](const Vec& x) { return value_(x, fiber); }, q);
  }

  /// ∂F/∂μ_I (or ∂F/∂a^I on the A side).
  Vec dfiber(const Vec& q, const Vec& fiber) const {
    check_dims(q, fiber);
    if (dfiber_) return dfiber_(q, fiber);
    return fd_gradient([&](const Vec& x) { return value_(q, x); }, fiber);
  }

  friend ScalarField operator+(const ScalarField& a, const ScalarField& b) {
    same_shape(a, b);
    if (a.expression() && b.expression())
      return from_expression(*a.expression() + *b.expression(), a.n_, a.m_);
    return combine(a, b, [](double x, double y) { return x + y; },
                   [](const Vec& ga, const Vec& gb, double, double) -> Vec { return ga + gb; });
  }

  friend ScalarField operator*(const ScalarField& a, const ScalarField& b) {
    same_shape(a, b);
    if (a.expression() && b.expression())
      return from_expression(*a.expression() * *b.expression(), a.n_, a.m_);
    return combine(a, b, [](double x, double y) { return x * y; },
                   [](const Vec& ga, const Vec& gb, double va, double vb) -> Vec { return vb * ga + va * gb; });
  }

  friend ScalarField operator*(double s, const ScalarField& a) {
    return ScalarField::constant(a.n_, a.m_, s) * a;
  }

  friend ScalarField operator-(const ScalarField& a) { return -1.0 * a; }

 private:
  struct Symbolic {
    Expr expr;
    std::vector<Expr> dq;
    std::vector<Expr> dfiber;
  };

  static Vec eval_all(const std::vector<Expr>& es, const Vec& q, const Vec& x) {
    Vec out(static_cast<Eigen::Index>(es.size()));
    const EvalPoint p{as_span(q), as_span(x), 0.0};
    for (std::size_t k = 0; k < es.size(); ++k) out[static_cast<Eigen::Index>(k)] = es[k].eval(p);
    return out;
  }

  static void same_shape(const ScalarField& a, const ScalarField& b) {
    if (a.n_ != b.n_ || a.m_ != b.m_) throw InputError("ScalarField dimension mismatch");
  }

  template <class V, class G>
  static ScalarField combine(const ScalarField& a, const ScalarField& b, V value, G grad) {
    ScalarField f = from_function(a.n_, a.m_, [a, b, value](const Vec& q, const Vec& x) {
      return value(a.value_(q, x), b.value_(q, x));
    });
    if (a.mode_ == DerivativeMode::Exact && b.mode_ == DerivativeMode::Exact) {
      f.mode_ = DerivativeMode::Exact;
      f.dq_ = [a, b, grad](const Vec& q, const Vec& x) {
        return grad(a.dq(q, x), b.dq(q, x), a.value_(q, x), b.value_(q, x));
      };
      f.dfiber_ = [a, b, grad](const Vec& q, const Vec& x) {
        return grad(a.dfiber(q, x), b.dfiber(q, x), a.value_(q, x), b.value_(q, x));
      };
    }
    return f;
  }

  void check_dims(const Vec& q, const Vec& fiber) const {
    if (q.size() != n_ || fiber.size() != m_)
      throw InputError("ScalarField evaluated with wrong dimensions: expected (" + std::to_string(n_) + ", " +
                       std::to_string(m_) + "), got (" + std::to_string(q.size()) + ", " +
                       std::to_string(fiber.size()) + ")");
  }

  int n_ = 0;
  int m_ = 0;
  DerivativeMode mode_ = DerivativeMode::FiniteDifference;
  ValueFn value_;
  GradFn dq_;
  GradFn dfiber_;
  std::shared_ptr<const Symbolic> symbolic_;
};

using Hamiltonian = ScalarField;
using Lagrangian = ScalarField;
using Potential = ScalarField;

}  // namespace lp
