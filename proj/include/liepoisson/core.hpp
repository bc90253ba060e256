#pragma once

// Charted Lie algebroids: anchor ρ^i_I(q), structure functions C^K_{IJ}(q),
// sections, the section bracket, and validators for the identities the Lie
// algebroid axioms impose on (ρ, C).

#include <algorithm>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "expression.hpp"
#include "scalar_field.hpp"
#include "tensor.hpp"
#include "trajectory.hpp"

namespace lp {

enum class Sign { Plus, Minus };

/// +1 for Plus, -1 for Minus.
constexpr double sign_value(Sign s) { return s == Sign::Plus ? 1.0 : -1.0; }
constexpr Sign flip(Sign s) { return s == Sign::Plus ? Sign::Minus : Sign::Plus; }

inline constexpr double kAntisymmetryTol = 1e-12;

/// Central differences of a matrix/tensor-valued field in each base direction.
template <class T, class F>
std::vector<T> fd_partials(const F& f, const Vec& q, double rel_step) {
  std::vector<T> out;
  out.reserve(static_cast<std::size_t>(q.size()));
  Vec x = q;
  for (Eigen::Index j = 0; j < q.size(); ++j) {
    const double h = rel_step * std::max(1.0, std::abs(q[j]));
    x[j] = q[j] + h;
    T plus = f(x);
    x[j] = q[j] - h;
    T minus = f(x);
    x[j] = q[j];
    if constexpr (std::is_same_v<T, Tensor3>) {
      plus -= minus;
      plus *= 1.0 / (2.0 * h);
      out.push_back(std::move(plus));
    } else {
      out.push_back((plus - minus) / (2.0 * h));
    }
  }
  return out;
}

/// Expression entries of a chart; kept so brackets can be built symbolically.
struct SymbolicChart {
  int base_dim = 0;
  int fiber_dim = 0;
  std::vector<Expr> anchor;     // row-major n×m: anchor[i*m + I] = ρ^i_I
  std::vector<Expr> structure;  // structure[(K*m + I)*m + J] = C^K_{IJ}

  const Expr& rho(int i, int I) const { return anchor[static_cast<std::size_t>(i * fiber_dim + I)]; }
  const Expr& c(int K, int I, int J) const {
    return structure[static_cast<std::size_t>((K * fiber_dim + I) * fiber_dim + J)];
  }
};

/// A Lie algebroid A → Q in one coordinate chart and one local frame {e_I}.
/// Immutable; every accessor is a pure function of q.
class AlgebroidChart {
 public:
  using AnchorFn = std::function<Mat(const Vec&)>;
  using StructureFn = std::function<Tensor3(const Vec&)>;
  using AnchorDerivFn = std::function<std::vector<Mat>(const Vec&)>;
  using StructureDerivFn = std::function<std::vector<Tensor3>(const Vec&)>;

  AlgebroidChart() = default;

  /// Chart from callables. Without derivative callables the chart runs in
  /// finite-difference mode.
  static AlgebroidChart from_functions(int base_dim, int fiber_dim, AnchorFn anchor, StructureFn structure,
                                       AnchorDerivFn anchor_dq = {}, StructureDerivFn structure_dq = {}) {
    if (base_dim < 0 || fiber_dim < 1) throw InputError("AlgebroidChart: need n >= 0 and m >= 1");
    AlgebroidChart c;
    c.n_ = base_dim;
    c.m_ = fiber_dim;
    c.anchor_ = std::move(anchor);
    c.structure_ = std::move(structure);
    c.anchor_dq_ = std::move(anchor_dq);
    c.structure_dq_ = std::move(structure_dq);
    c.mode_ = (c.anchor_dq_ && c.structure_dq_) || base_dim == 0 ? DerivativeMode::Exact
                                                                 : DerivativeMode::FiniteDifference;
    return c;
  }

  /// Chart from expression entries, with exact symbolic base derivatives.
  static AlgebroidChart from_expressions(SymbolicChart sym) {
    const int n = sym.base_dim;
    const int m = sym.fiber_dim;
    if (static_cast<int>(sym.anchor.size()) != n * m || static_cast<int>(sym.structure.size()) != m * m * m)
      throw InputError("SymbolicChart: entry counts do not match dimensions");
    auto s = std::make_shared<SymbolicChart>(std::move(sym));
    auto d_anchor = std::make_shared<std::vector<std::vector<Expr>>>();
    auto d_structure = std::make_shared<std::vector<std::vector<Expr>>>();
    for (int j = 0; j < n; ++j) {
      std::vector<Expr> da, dc;
      for (const auto& e : s->anchor) da.push_back(differentiate(e, base_var(j)));
      for (const auto& e : s->structure) dc.push_back(differentiate(e, base_var(j)));
      d_anchor->push_back(std::move(da));
      d_structure->push_back(std::move(dc));
    }
    auto anchor = [s, n, m](const Vec& q) { return eval_matrix(s->anchor, n, m, q); };
    auto structure = [s, m](const Vec& q) { return eval_tensor(s->structure, m, q); };
    auto anchor_dq = [d_anchor, n, m](const Vec& q) {
      std::vector<Mat> out;
      for (const auto& es : *d_anchor) out.push_back(eval_matrix(es, n, m, q));
      return out;
    };
    auto structure_dq = [d_structure, m](const Vec& q) {
      std::vector<Tensor3> out;
      for (const auto& es : *d_structure) out.push_back(eval_tensor(es, m, q));
      return out;
    };
    AlgebroidChart c = from_functions(n, m, anchor, structure, anchor_dq, structure_dq);
    c.symbolic_ = std::move(s);
    return c;
  }

  int base_dim() const { return n_; }
  int fiber_dim() const { return m_; }
  DerivativeMode derivative_mode() const { return mode_; }
  const SymbolicChart* symbolic() const { return symbolic_.get(); }

  void check_q(const Vec& q) const {
    if (q.size() != n_)
      throw InputError("base point has dimension " + std::to_string(q.size()) + ", chart expects " +
                       std::to_string(n_));
  }

  /// ρ(q) without validation beyond dimensions.
  Mat anchor_raw(const Vec& q) const {
    check_q(q);
    if (n_ == 0) return Mat(0, m_);
    return anchor_(q);
  }

  /// C(q) without the antisymmetry guard.
  Tensor3 structure_raw(const Vec& q) const {
    check_q(q);
    return structure_(q);
  }

  /// ∂_j ρ(q), j = 0..n-1. `rel_step` is used only in finite-difference mode.
  std::vector<Mat> anchor_dq(const Vec& q, double rel_step = 1e-6) const {
    check_q(q);
    if (n_ == 0) return {};
    if (anchor_dq_) return anchor_dq_(q);
    return fd_partials<Mat>(anchor_, q, rel_step);
  }

  /// ∂_j C(q), j = 0..n-1.
  std::vector<Tensor3> structure_dq(const Vec& q, double rel_step = 1e-6) const {
    check_q(q);
    if (n_ == 0) return {};
    if (structure_dq_) return structure_dq_(q);
    return fd_partials<Tensor3>(structure_, q, rel_step);
  }

 private:
  static Mat eval_matrix(const std::vector<Expr>& es, int rows, int cols, const Vec& q) {
    Mat out(rows, cols);
    const EvalPoint p{as_span(q), {}, 0.0};
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) out(r, c) = es[static_cast<std::size_t>(r * cols + c)].eval(p);
    return out;
  }
  static Tensor3 eval_tensor(const std::vector<Expr>& es, int m, const Vec& q) {
    Tensor3 out(m, m, m);
    const EvalPoint p{as_span(q), {}, 0.0};
    for (std::size_t k = 0; k < es.size(); ++k)
      if (!es[k].is_zero()) out.data()[k] = es[k].eval(p);
    return out;
  }

  int n_ = 0;
  int m_ = 1;
  DerivativeMode mode_ = DerivativeMode::Exact;
  AnchorFn anchor_;
  StructureFn structure_;
  AnchorDerivFn anchor_dq_;
  StructureDerivFn structure_dq_;
  std::shared_ptr<const SymbolicChart> symbolic_;
};

/// ρ(q) as an n×m matrix (0×m when n = 0).
inline Mat eval_anchor(const AlgebroidChart& alg, const Vec& q) { return alg.anchor_raw(q); }

/// max_{K,I,J} |C^K_{IJ} + C^K_{JI}|.
inline double antisymmetry_defect(const Tensor3& c) {
  double worst = 0.0;
  for (int K = 0; K < c.dim0(); ++K)
    for (int I = 0; I < c.dim1(); ++I)
      for (int J = I; J < c.dim2(); ++J) worst = std::max(worst, std::abs(c(K, I, J) + c(K, J, I)));
  return worst;
}

/// C(q), antisymmetric in the lower indices. Throws StructureError when the
/// supplied structure functions violate antisymmetry beyond 1e-12.
inline Tensor3 eval_structure(const AlgebroidChart& alg, const Vec& q) {
  Tensor3 c = alg.structure_raw(q);
  const double defect = antisymmetry_defect(c);
  if (defect > kAntisymmetryTol)
    throw StructureError("structure functions are not antisymmetric (defect " + std::to_string(defect) + ")");
  return c;
}

/// A section of A: coefficient functions ξ^I(q) in the chart frame.
class SectionField {
 public:
  using CoeffFn = std::function<Vec(const Vec&)>;
  using JacFn = std::function<Mat(const Vec&)>;

  SectionField() = default;

  static SectionField from_expressions(int base_dim, std::vector<Expr> coeffs) {
    auto es = std::make_shared<std::vector<Expr>>(std::move(coeffs));
    auto jac = std::make_shared<std::vector<Expr>>();
    const int m = static_cast<int>(es->size());
    for (int K = 0; K < m; ++K)
      for (int i = 0; i < base_dim; ++i) jac->push_back(differentiate((*es)[static_cast<std::size_t>(K)], base_var(i)));
    SectionField s;
    s.n_ = base_dim;
    s.m_ = m;
    s.exprs_ = es;
    s.coeffs_ = [es](const Vec& q) {
      Vec out(static_cast<Eigen::Index>(es->size()));
      const EvalPoint p{as_span(q), {}, 0.0};
      for (std::size_t k = 0; k < es->size(); ++k) out[static_cast<Eigen::Index>(k)] = (*es)[k].eval(p);
      return out;
    };
    s.jac_ = [jac, m, base_dim](const Vec& q) {
      Mat out(m, base_dim);
      const EvalPoint p{as_span(q), {}, 0.0};
      for (int K = 0; K < m; ++K)
        for (int i = 0; i < base_dim; ++i) out(K, i) = (*jac)[static_cast<std::size_t>(K * base_dim + i)].eval(p);
      return out;
    };
    return s;
  }

  static SectionField constant(int base_dim, const Vec& coeffs) {
    std::vector<Expr> es;
    for (Eigen::Index k = 0; k < coeffs.size(); ++k) es.push_back(Expr::constant(coeffs[k]));
    return from_expressions(base_dim, std::move(es));
  }

  static SectionField from_function(int base_dim, int fiber_dim, CoeffFn coeffs, JacFn jac = {}) {
    SectionField s;
    s.n_ = base_dim;
    s.m_ = fiber_dim;
    s.coeffs_ = std::move(coeffs);
    s.jac_ = std::move(jac);
    return s;
  }

  int base_dim() const { return n_; }
  int fiber_dim() const { return m_; }
  DerivativeMode derivative_mode() const { return jac_ ? DerivativeMode::Exact : DerivativeMode::FiniteDifference; }
  const std::vector<Expr>* expressions() const { return exprs_.get(); }

  Vec operator()(const Vec& q) const {
    if (q.size() != n_) throw InputError("SectionField: base dimension mismatch");
    return coeffs_(q);
  }

  /// ∂_i ξ^K as an m×n matrix.
  Mat jacobian(const Vec& q) const {
    if (q.size() != n_) throw InputError("SectionField: base dimension mismatch");
    if (n_ == 0) return Mat(m_, 0);
    if (jac_) return jac_(q);
    Mat out(m_, n_);
    auto cols = fd_partials<Vec>(coeffs_, q, 1e-6);
    for (int i = 0; i < n_; ++i) out.col(i) = cols[static_cast<std::size_t>(i)];
    return out;
  }

 private:
  int n_ = 0;
  int m_ = 0;
  CoeffFn coeffs_;
  JacFn jac_;
  std::shared_ptr<const std::vector<Expr>> exprs_;
};

/// C^K_{IJ} x^I y^J.
inline Vec contract_structure(const Tensor3& c, const Vec& x, const Vec& y) {
  const int m = c.dim0();
  Vec out = Vec::Zero(m);
  for (int K = 0; K < m; ++K)
    for (int I = 0; I < m; ++I) {
      if (x[I] == 0.0) continue;
      for (int J = 0; J < m; ++J) out[K] += c(K, I, J) * x[I] * y[J];
    }
  return out;
}

/// [ξ, η]^K = C^K_{IJ} ξ^I η^J + ρ^i_I ξ^I ∂_i η^K − ρ^i_J η^J ∂_i ξ^K.
inline Vec section_bracket(const AlgebroidChart& alg, const SectionField& xi, const SectionField& eta,
                           const Vec& q) {
  const int m = alg.fiber_dim();
  if (xi.fiber_dim() != m || eta.fiber_dim() != m) throw InputError("section_bracket: fiber dimension mismatch");
  const Vec x = xi(q);
  const Vec y = eta(q);
  Vec out = contract_structure(eval_structure(alg, q), x, y);
  if (alg.base_dim() > 0) {
    const Mat rho = eval_anchor(alg, q);
    out += eta.jacobian(q) * (rho * x) - xi.jacobian(q) * (rho * y);
  }
  return out;
}

/// Φ_X(p) = ⟨μ, X(q)⟩.
inline double linear_observable(const SectionField& X, const PhasePoint& pt) {
  const Vec x = X(pt.q);
  if (x.size() != pt.mu.size()) throw InputError("linear_observable: dimension mismatch");
  return pt.mu.dot(x);
}

struct StructureReport {
  double anchor_residual = 0.0;
  double jacobi_residual = 0.0;
  double antisymmetry_residual = 0.0;
  std::size_t samples = 0;
  bool pass = false;
};

/// Residuals, maximised over the sample points, of
///   ρ^j_I ∂_j ρ^i_J − ρ^j_J ∂_j ρ^i_I − ρ^i_K C^K_{IJ}            (anchor morphism)
///   Σ_cyc(I,J,K) ( ρ^i_I ∂_i C^L_{JK} + C^L_{IM} C^M_{JK} )          (Jacobi)
/// and of the lower-index antisymmetry of C. The raw structure functions are
/// used, so a broken chart is reported, not thrown.
inline StructureReport check_structure_equations(const AlgebroidChart& alg, const std::vector<Vec>& qs,
                                                 double h, double tol) {
  if (!(tol > 0.0)) throw InputError("check_structure_equations: tol must be positive");
  if (alg.derivative_mode() == DerivativeMode::FiniteDifference && !(h > 0.0))
    throw InputError("check_structure_equations: h must be positive in finite-difference mode");
  const int n = alg.base_dim();
  const int m = alg.fiber_dim();
  StructureReport r;
  r.samples = qs.size();
  for (const Vec& q : qs) {
    const Mat rho = alg.anchor_raw(q);
    const Tensor3 c = alg.structure_raw(q);
    const auto drho = alg.anchor_dq(q, h);
    const auto dc = alg.structure_dq(q, h);
    r.antisymmetry_residual = std::max(r.antisymmetry_residual, antisymmetry_defect(c));

    for (int I = 0; I < m; ++I)
      for (int J = 0; J < m; ++J)
        for (int i = 0; i < n; ++i) {
          double v = 0.0;
          for (int j = 0; j < n; ++j) {
            const Mat& d = drho[static_cast<std::size_t>(j)];
            v += rho(j, I) * d(i, J) - rho(j, J) * d(i, I);
          }
          for (int K = 0; K < m; ++K) v -= rho(i, K) * c(K, I, J);
          r.anchor_residual = std::max(r.anchor_residual, std::abs(v));
        }

    auto jacobi_term = [&](int L, int I, int J, int K) {
      double v = 0.0;
      for (int i = 0; i < n; ++i) v += rho(i, I) * dc[static_cast<std::size_t>(i)](L, J, K);
      for (int M = 0; M < m; ++M) v += c(L, I, M) * c(M, J, K);
      return v;
    };
    for (int L = 0; L < m; ++L)
      for (int I = 0; I < m; ++I)
        for (int J = 0; J < m; ++J)
          for (int K = 0; K < m; ++K) {
            const double v = jacobi_term(L, I, J, K) + jacobi_term(L, J, K, I) + jacobi_term(L, K, I, J);
            r.jacobi_residual = std::max(r.jacobi_residual, std::abs(v));
          }
  }
  r.pass = r.anchor_residual <= tol && r.jacobi_residual <= tol && r.antisymmetry_residual <= tol;
  return r;
}

/// max_k |q̇(t_k) − ρ(q(t_k)) a(t_k)| with q̇ from grid differences.
inline double a_path_residual(const AlgebroidChart& alg, const Trajectory& traj) {
  if (traj.size() < 3) throw InputError("a_path_residual needs at least 3 samples");
  traj.validate(true);
  if (alg.base_dim() == 0) return 0.0;
  const SampledPath qdot = time_derivative(traj.q_path(), traj.dt());
  double worst = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const Vec& q = traj.states[k].q;
    worst = std::max(worst, (qdot[k] - eval_anchor(alg, q) * traj.apath[k]).norm());
  }
  return worst;
}

}  // namespace lp
