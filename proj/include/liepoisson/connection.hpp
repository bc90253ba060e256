#pragma once

// TQ-connections on A, the induced A-connections ∇ and ∇̄ (and the dual ∇̄*),
// torsion, the vertical/horizontal splitting of differentials, and covariant
// derivatives along sampled A-paths.

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "core.hpp"

namespace lp {

/// Christoffel symbols Γ^K_{iJ}(q), ∇_{∂_i} e_J = Γ^K_{iJ} e_K, stored as a
/// Tensor3 indexed (K, i, J) with shape (m, n, m).
class TQConnection {
 public:
  using ChristoffelFn = std::function<Tensor3(const Vec&)>;

  TQConnection() = default;

  static TQConnection zero(int base_dim, int fiber_dim) {
    TQConnection c;
    c.n_ = base_dim;
    c.m_ = fiber_dim;
    c.is_zero_ = true;
    return c;
  }

  static TQConnection from_function(int base_dim, int fiber_dim, ChristoffelFn fn) {
    TQConnection c;
    c.n_ = base_dim;
    c.m_ = fiber_dim;
    c.is_zero_ = false;
    c.fn_ = std::move(fn);
    return c;
  }

  /// `entries[(K*n + i)*m + J]` = Γ^K_{iJ}.
  static TQConnection from_expressions(int base_dim, int fiber_dim, std::vector<Expr> entries) {
    if (static_cast<int>(entries.size()) != fiber_dim * base_dim * fiber_dim)
      throw InputError("TQConnection: expected m*n*m Christoffel entries");
    auto es = std::make_shared<const std::vector<Expr>>(std::move(entries));
    return from_function(base_dim, fiber_dim, [es, base_dim, fiber_dim](const Vec& q) {
      Tensor3 g(fiber_dim, base_dim, fiber_dim);
      const EvalPoint p{as_span(q), {}, 0.0};
      for (std::size_t k = 0; k < es->size(); ++k)
        if (!(*es)[k].is_zero()) g.data()[k] = (*es)[k].eval(p);
      return g;
    });
  }

  int base_dim() const { return n_; }
  int fiber_dim() const { return m_; }
  bool is_zero() const { return is_zero_; }

  Tensor3 christoffel(const Vec& q) const {
    if (q.size() != n_) throw InputError("TQConnection: base dimension mismatch");
    if (is_zero_ || n_ == 0) return Tensor3(m_, n_, m_);
    return fn_(q);
  }

 private:
  int n_ = 0;
  int m_ = 1;
  bool is_zero_ = true;
  ChristoffelFn fn_;
};

inline void check_compatible(const AlgebroidChart& alg, const TQConnection& conn) {
  if (alg.base_dim() != conn.base_dim() || alg.fiber_dim() != conn.fiber_dim())
    throw InputError("connection dimensions do not match the chart");
}

/// Vertical (fiber, element of A_q) and horizontal (covector on Q) parts of a
/// differential.
struct SplitCovector {
  Vec ver;
  Vec hor;
};

/// Which bundle the differentiated function lives on: A* (functions of (q, μ))
/// or A (functions of (q, a)).
enum class BundleSide { Dual, Total };

/// Γ^K_{iL} v^i a^L.
inline Vec christoffel_apply(const Tensor3& gamma, const Vec& v, const Vec& a) {
  const int m = gamma.dim0();
  Vec out = Vec::Zero(m);
  for (int K = 0; K < m; ++K)
    for (int i = 0; i < gamma.dim1(); ++i) {
      if (v[i] == 0.0) continue;
      for (int L = 0; L < m; ++L) out[K] += gamma(K, i, L) * v[i] * a[L];
    }
  return out;
}

/// w_i = Γ^K_{iJ} x^J p_K, a covector on Q.
inline Vec christoffel_pair(const Tensor3& gamma, const Vec& x, const Vec& p) {
  const int m = gamma.dim0();
  const int n = gamma.dim1();
  Vec w = Vec::Zero(n);
  for (int i = 0; i < n; ++i)
    for (int K = 0; K < m; ++K)
      for (int J = 0; J < m; ++J) w[i] += gamma(K, i, J) * x[J] * p[K];
  return w;
}

/// (C^K_{IJ} x^J p_K)_I, i.e. −ad*_x p in the Lie algebra case.
inline Vec structure_pair(const Tensor3& c, const Vec& x, const Vec& p) {
  const int m = c.dim0();
  Vec out = Vec::Zero(m);
  for (int K = 0; K < m; ++K) {
    if (p[K] == 0.0) continue;
    for (int I = 0; I < m; ++I)
      for (int J = 0; J < m; ++J) out[I] += c(K, I, J) * x[J] * p[K];
  }
  return out;
}

/// Split dF at (q, fiber) relative to the connection.
///   Dual:  ver^I = ∂F/∂μ_I,  hor_i = ∂F/∂q^i + Γ^K_{iJ} ver^J μ_K
///   Total: ver_I = ∂F/∂a^I,  hor_i = ∂F/∂q^i − Γ^K_{iJ} a^J ver_K
inline SplitCovector split_differential(const AlgebroidChart& alg, const TQConnection& conn, const ScalarField& F,
                                        const Vec& q, const Vec& fiber, BundleSide side) {
  check_compatible(alg, conn);
  alg.check_q(q);
  SplitCovector out;
  out.ver = F.dfiber(q, fiber);
  out.hor = F.dq(q, fiber);
  if (alg.base_dim() > 0 && !conn.is_zero()) {
    const Tensor3 gamma = conn.christoffel(q);
    if (side == BundleSide::Dual) out.hor += christoffel_pair(gamma, out.ver, fiber);
    else out.hor -= christoffel_pair(gamma, fiber, out.ver);
  }
  return out;
}

inline SplitCovector split_differential(const AlgebroidChart& alg, const TQConnection& conn, const ScalarField& F,
                                        const PhasePoint& pt, BundleSide side = BundleSide::Dual) {
  return split_differential(alg, conn, F, pt.q, pt.mu, side);
}

/// T^K_{IJ} = ρ^i_I Γ^K_{iJ} − ρ^i_J Γ^K_{iI} − C^K_{IJ}.
inline Tensor3 torsion_tensor(const AlgebroidChart& alg, const TQConnection& conn, const Vec& q) {
  check_compatible(alg, conn);
  const int n = alg.base_dim();
  const int m = alg.fiber_dim();
  Tensor3 t = eval_structure(alg, q);
  t *= -1.0;
  if (n == 0 || conn.is_zero()) return t;
  const Mat rho = eval_anchor(alg, q);
  const Tensor3 gamma = conn.christoffel(q);
  for (int K = 0; K < m; ++K)
    for (int I = 0; I < m; ++I)
      for (int J = 0; J < m; ++J) {
        double v = 0.0;
        for (int i = 0; i < n; ++i) v += rho(i, I) * gamma(K, i, J) - rho(i, J) * gamma(K, i, I);
        t(K, I, J) += v;
      }
  return t;
}

namespace detail {

inline void check_path_grid(const Trajectory& apath, const SampledPath& x) {
  if (apath.apath.size() != apath.size() || apath.states.size() != apath.size())
    throw InputError("path operator: trajectory lacks A-path samples");
  if (x.size() != apath.size()) throw InputError("path operator: sampled path is not on the trajectory grid");
}

}  // namespace detail

/// (∇̄_a b)^K = ḃ^K + Γ^K_{iL} ρ^i_J b^J a^L + C^K_{IJ} a^I b^J along the A-path.
inline SampledPath nabla_bar_path(const AlgebroidChart& alg, const TQConnection& conn, const Trajectory& apath,
                                  const SampledPath& b) {
  check_compatible(alg, conn);
  detail::check_path_grid(apath, b);
  const SampledPath bdot = time_derivative(b, apath.dt());
  SampledPath out(b.size());
  for (std::size_t k = 0; k < b.size(); ++k) {
    const Vec& q = apath.states[k].q;
    const Vec& a = apath.apath[k];
    out[k] = bdot[k] + contract_structure(eval_structure(alg, q), a, b[k]);
    if (alg.base_dim() > 0 && !conn.is_zero())
      out[k] += christoffel_apply(conn.christoffel(q), eval_anchor(alg, q) * b[k], a);
  }
  return out;
}

/// (∇̄*_a p)_I = ṗ_I − Γ^K_{iL} ρ^i_I a^L p_K + C^K_{IJ} a^J p_K along the A-path.
inline SampledPath nabla_bar_dual_path(const AlgebroidChart& alg, const TQConnection& conn, const Trajectory& apath,
                                       const SampledPath& p) {
  check_compatible(alg, conn);
  detail::check_path_grid(apath, p);
  const SampledPath pdot = time_derivative(p, apath.dt());
  SampledPath out(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    const Vec& q = apath.states[k].q;
    const Vec& a = apath.apath[k];
    out[k] = pdot[k] + structure_pair(eval_structure(alg, q), a, p[k]);
    if (alg.base_dim() > 0 && !conn.is_zero())
      out[k] -= eval_anchor(alg, q).transpose() * christoffel_pair(conn.christoffel(q), a, p[k]);
  }
  return out;
}

}  // namespace lp
