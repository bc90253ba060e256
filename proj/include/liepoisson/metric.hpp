#pragma once

// Bundle metrics on A, kinetic-plus-potential Hamiltonians, the A-connections
// ∇̄† and ∇^g (Levi-Civita), and the Newton form of the (−) equations.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <sstream>
#include <utility>
#include <vector>

#include "dynamics.hpp"

namespace lp {

/// Symmetric positive-definite g_{IJ}(q) on the fibers of A.
class BundleMetric {
 public:
  using MetricFn = std::function<Mat(const Vec&)>;
  using MetricDerivFn = std::function<std::vector<Mat>(const Vec&)>;

  BundleMetric() = default;

  static BundleMetric constant(int base_dim, const Mat& g) {
    const int n = base_dim;
    const auto m = static_cast<int>(g.rows());
    return from_function(n, m, [g](const Vec&) { return g; },
                         [n, m](const Vec&) { return std::vector<Mat>(static_cast<std::size_t>(n), Mat::Zero(m, m)); });
  }

  static BundleMetric from_function(int base_dim, int fiber_dim, MetricFn g, MetricDerivFn dg = {}) {
    BundleMetric b;
    b.n_ = base_dim;
    b.m_ = fiber_dim;
    b.g_ = std::move(g);
    b.dg_ = std::move(dg);
    return b;
  }

  /// `entries[I*m + J]` = g_{IJ}; exact symbolic base derivatives.
  static BundleMetric from_expressions(int base_dim, int fiber_dim, std::vector<Expr> entries) {
    if (static_cast<int>(entries.size()) != fiber_dim * fiber_dim)
      throw InputError("BundleMetric: expected m*m entries");
    auto es = std::make_shared<const std::vector<Expr>>(std::move(entries));
    auto des = std::make_shared<std::vector<std::vector<Expr>>>();
    for (int i = 0; i < base_dim; ++i) {
      std::vector<Expr> d;
      for (const auto& e : *es) d.push_back(differentiate(e, base_var(i)));
      des->push_back(std::move(d));
    }
    const int m = fiber_dim;
    auto eval = [m](const std::vector<Expr>& v, const Vec& q) {
      Mat out(m, m);
      const EvalPoint p{as_span(q), {}, 0.0};
      for (int I = 0; I < m; ++I)
        for (int J = 0; J < m; ++J) out(I, J) = v[static_cast<std::size_t>(I * m + J)].eval(p);
      return out;
    };
    return from_function(base_dim, fiber_dim, [es, eval](const Vec& q) { return eval(*es, q); },
                         [des, eval](const Vec& q) {
                           std::vector<Mat> out;
                           for (const auto& d : *des) out.push_back(eval(d, q));
                           return out;
                         });
  }

  int base_dim() const { return n_; }
  int fiber_dim() const { return m_; }

  /// g(q), validated: exactly symmetric and positive-definite.
  Mat g(const Vec& q) const {
    Mat out = g_(q);
    if (out.rows() != m_ || out.cols() != m_) throw MetricError("metric has wrong shape");
    if (!(out - out.transpose()).isZero(0.0)) throw MetricError("metric is not symmetric at q=" + format(q));
    Eigen::LLT<Mat> llt(out);
    if (llt.info() != Eigen::Success) throw MetricError("metric is not positive-definite at q=" + format(q));
    return out;
  }

  /// ∂_i g(q), i = 0..n-1.
  std::vector<Mat> dg(const Vec& q) const {
    if (n_ == 0) return {};
    if (dg_) return dg_(q);
    return fd_partials<Mat>(g_, q, 1e-6);
  }

  Vec flat(const Vec& q, const Vec& x) const { return g(q) * x; }

  Vec sharp(const Vec& q, const Vec& x) const {
    Eigen::LLT<Mat> llt(g(q));
    return llt.solve(x);
  }

  static std::string format(const Vec& q) {
    std::ostringstream os;
    os << "(";
    for (Eigen::Index i = 0; i < q.size(); ++i) os << (i ? ", " : "") << q[i];
    os << ")";
    return os.str();
  }

 private:
  int n_ = 0;
  int m_ = 1;
  MetricFn g_;
  MetricDerivFn dg_;
};

enum class MetricDirection { Flat, Sharp };

inline Vec metric_convert(const BundleMetric& gm, const Vec& q, const Vec& x, MetricDirection dir) {
  if (x.size() != gm.fiber_dim()) throw InputError("metric_convert: dimension mismatch");
  return dir == MetricDirection::Flat ? gm.flat(q, x) : gm.sharp(q, x);
}

/// H(q, μ) = ½⟨μ, g♯μ⟩ + U(q). U is a field with fiber dimension 0.
inline Hamiltonian kinetic_potential_hamiltonian(const BundleMetric& gm, const Potential& U) {
  const int n = gm.base_dim();
  const int m = gm.fiber_dim();
  if (U.base_dim() != n) throw InputError("potential base dimension does not match the metric");
  const Vec none(0);
  return ScalarField::from_function(
      n, m, [gm, U, none](const Vec& q, const Vec& mu) { return 0.5 * mu.dot(gm.sharp(q, mu)) + U(q, none); },
      [gm, U, none, n](const Vec& q, const Vec& mu) -> Vec {
        const Vec h = gm.sharp(q, mu);
        const auto dg = gm.dg(q);
        Vec out = U.dq(q, none);
        for (int i = 0; i < n; ++i) out[i] -= 0.5 * h.dot(dg[static_cast<std::size_t>(i)] * h);
        return out;
      },
      [gm](const Vec& q, const Vec& mu) { return gm.sharp(q, mu); });
}

/// grad U = g♯ ρ* dU.
inline Vec grad_potential(const AlgebroidChart& alg, const BundleMetric& gm, const Potential& U, const Vec& q) {
  if (alg.base_dim() == 0) return Vec::Zero(alg.fiber_dim());
  return gm.sharp(q, eval_anchor(alg, q).transpose() * U.dq(q, Vec(0)));
}

/// Coefficients of ∇̄†_X Y = g♯(∇̄*_X g♭Y) on the frame: ∇̄†_{e_I} e_J = D^K_{IJ} e_K,
///   D^M_{IJ} = g^{ML} [ ρ^i_I ∂_i g_{LJ} − g_{KJ} (ρ^i_L Γ^K_{iI} + C^K_{IL}) ].
inline Tensor3 nabla_dagger_coeffs(const AlgebroidChart& alg, const TQConnection& conn, const BundleMetric& gm,
                                   const Vec& q) {
  check_compatible(alg, conn);
  const int n = alg.base_dim();
  const int m = alg.fiber_dim();
  const Mat g = gm.g(q);
  const Tensor3 c = eval_structure(alg, q);
  const Mat rho = eval_anchor(alg, q);
  const auto dg = gm.dg(q);
  const Tensor3 gamma = conn.christoffel(q);
  Eigen::LLT<Mat> llt(g);
  Tensor3 d(m, m, m);
  for (int I = 0; I < m; ++I)
    for (int J = 0; J < m; ++J) {
      Vec rhs = Vec::Zero(m);
      for (int L = 0; L < m; ++L) {
        double v = 0.0;
        for (int i = 0; i < n; ++i) v += rho(i, I) * dg[static_cast<std::size_t>(i)](L, J);
        for (int K = 0; K < m; ++K) {
          double conn_term = c(K, I, L);
          for (int i = 0; i < n; ++i) conn_term += rho(i, L) * gamma(K, i, I);
          v -= g(K, J) * conn_term;
        }
        rhs[L] = v;
      }
      const Vec col = llt.solve(rhs);
      for (int M = 0; M < m; ++M) d(M, I, J) = col[M];
    }
  return d;
}

/// Levi-Civita A-connection ∇^g_{e_I} e_J = Λ^K_{IJ} e_K from the Koszul formula
///   2 g(∇_{e_I} e_J, e_K) = ρ_I[g_JK] + ρ_J[g_IK] − ρ_K[g_IJ]
///                           − g(e_I,[e_J,e_K]) − g(e_J,[e_I,e_K]) + g(e_K,[e_I,e_J]).
inline Tensor3 levi_civita_coeffs(const AlgebroidChart& alg, const BundleMetric& gm, const Vec& q) {
  const int n = alg.base_dim();
  const int m = alg.fiber_dim();
  const Mat g = gm.g(q);
  const Tensor3 c = eval_structure(alg, q);
  const Mat rho = eval_anchor(alg, q);
  const auto dg = gm.dg(q);
  auto rho_d = [&](int I, int A, int B) {
    double v = 0.0;
    for (int i = 0; i < n; ++i) v += rho(i, I) * dg[static_cast<std::size_t>(i)](A, B);
    return v;
  };
  auto g_bracket = [&](int A, int B, int C) {  // g(e_A, [e_B, e_C])
    double v = 0.0;
    for (int L = 0; L < m; ++L) v += g(A, L) * c(L, B, C);
    return v;
  };
  Eigen::LLT<Mat> llt(g);
  Tensor3 out(m, m, m);
  for (int I = 0; I < m; ++I)
    for (int J = 0; J < m; ++J) {
      Vec rhs(m);
      for (int K = 0; K < m; ++K)
        rhs[K] = 0.5 * (rho_d(I, J, K) + rho_d(J, I, K) - rho_d(K, I, J) - g_bracket(I, J, K) -
                        g_bracket(J, I, K) + g_bracket(K, I, J));
      const Vec col = llt.solve(rhs);
      for (int K = 0; K < m; ++K) out(K, I, J) = col[K];
    }
  return out;
}

/// max_{i,J,K} |∂_i g_{JK} − Γ^L_{iJ} g_{LK} − Γ^L_{iK} g_{JL}|.
inline double metric_compatibility_residual(const AlgebroidChart& alg, const TQConnection& conn,
                                            const BundleMetric& gm, const Vec& q) {
  check_compatible(alg, conn);
  const int n = alg.base_dim();
  const int m = alg.fiber_dim();
  if (n == 0) return 0.0;
  const Mat g = gm.g(q);
  const auto dg = gm.dg(q);
  const Tensor3 gamma = conn.christoffel(q);
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int J = 0; J < m; ++J)
      for (int K = 0; K < m; ++K) {
        double v = dg[static_cast<std::size_t>(i)](J, K);
        for (int L = 0; L < m; ++L) v -= gamma(L, i, J) * g(L, K) + gamma(L, i, K) * g(J, L);
        worst = std::max(worst, std::abs(v));
      }
  return worst;
}

inline constexpr double kCompatibilityTol = 1e-8;

struct NewtonVelocity {
  Vec qdot;
  Vec mudot;
  Vec adot;  // from the sharp form ∇̄†_a a = −grad U
};

/// Newton form of the (−) equations for H = ½⟨μ, g♯μ⟩ + U with a
/// metric-compatible Γ: a = g♯μ, q̇ = ρ(a), ∇̄*_a p = −ρ*(dU).
inline NewtonVelocity newton_field(const AlgebroidChart& alg, const TQConnection& conn, const BundleMetric& gm,
                                   const Potential& U, const PhasePoint& pt, Sign s = Sign::Minus) {
  if (s != Sign::Minus) throw InputError("newton_field is defined for the (-) structure only");
  const double residual = metric_compatibility_residual(alg, conn, gm, pt.q);
  if (residual > kCompatibilityTol)
    throw IncompatibilityError("connection is not metric-compatible (residual " + std::to_string(residual) + ")",
                               residual);
  const int n = alg.base_dim();
  const Mat g = gm.g(pt.q);
  Eigen::LLT<Mat> llt(g);
  const Vec a = llt.solve(pt.mu);
  const Tensor3 c = eval_structure(alg, pt.q);
  NewtonVelocity v;
  v.mudot = -structure_pair(c, a, pt.mu);
  Vec adot_rhs = -structure_pair(c, a, pt.mu);
  if (n > 0) {
    const Mat rho = eval_anchor(alg, pt.q);
    v.qdot = rho * a;
    const Vec force = -(rho.transpose() * U.dq(pt.q, Vec(0)));
    const Vec conn_term = conn.is_zero() ? Vec::Zero(alg.fiber_dim())
                                         : Vec(rho.transpose() * christoffel_pair(conn.christoffel(pt.q), a, pt.mu));
    v.mudot += force + conn_term;
    // g ȧ = μ̇ − ġ a with ġ = ∂_i g q̇^i.
    const auto dg = gm.dg(pt.q);
    Mat gdot = Mat::Zero(g.rows(), g.cols());
    for (int i = 0; i < n; ++i) gdot += dg[static_cast<std::size_t>(i)] * v.qdot[i];
    adot_rhs += force + conn_term - gdot * a;
  } else {
    v.qdot = Vec(0);
  }
  v.adot = llt.solve(adot_rhs);
  return v;
}

}  // namespace lp
