#pragma once

// The (±) Lie–Poisson bracket on A*, in chart coordinates and through the
// connection/torsion form of the Poisson tensor.

#include <algorithm>
#include <cmath>
#include <vector>

#include "connection.hpp"

namespace lp {

/// {F,G}_± = ±C^K_{IJ} F^I G^J μ_K ± ρ^i_I (F^I ∂_i G − ∂_i F G^I), where
/// F^I = ∂F/∂μ_I.
inline double bracket_coords(const AlgebroidChart& alg, const ScalarField& F, const ScalarField& G,
                             const PhasePoint& pt, Sign s) {
  const Vec fm = F.dfiber(pt.q, pt.mu);
  const Vec gm = G.dfiber(pt.q, pt.mu);
  double v = pt.mu.dot(contract_structure(eval_structure(alg, pt.q), fm, gm));
  if (alg.base_dim() > 0) {
    const Mat rho = eval_anchor(alg, pt.q);
    v += G.dq(pt.q, pt.mu).dot(rho * fm) - F.dq(pt.q, pt.mu).dot(rho * gm);
  }
  return sign_value(s) * v;
}

/// Π_±(α,β) = ±[⟨β^hor, ρ(α^ver)⟩ − ⟨α^hor, ρ(β^ver)⟩ − ⟨p, T(α^ver, β^ver)⟩].
inline double poisson_tensor_apply(const AlgebroidChart& alg, const TQConnection& conn, const PhasePoint& pt,
                                   const SplitCovector& alpha, const SplitCovector& beta, Sign s) {
  const int n = alg.base_dim();
  const int m = alg.fiber_dim();
  if (alpha.ver.size() != m || beta.ver.size() != m || alpha.hor.size() != n || beta.hor.size() != n)
    throw InputError("poisson_tensor_apply: covector components have wrong sizes");
  double v = -pt.mu.dot(contract_structure(torsion_tensor(alg, conn, pt.q), alpha.ver, beta.ver));
  if (n > 0) {
    const Mat rho = eval_anchor(alg, pt.q);
    v += beta.hor.dot(rho * alpha.ver) - alpha.hor.dot(rho * beta.ver);
  }
  return sign_value(s) * v;
}

/// Bracket through the Poisson tensor: split dF and dG, then apply Π_±.
inline double bracket_connection(const AlgebroidChart& alg, const TQConnection& conn, const ScalarField& F,
                                 const ScalarField& G, const PhasePoint& pt, Sign s) {
  const SplitCovector a = split_differential(alg, conn, F, pt, BundleSide::Dual);
  const SplitCovector b = split_differential(alg, conn, G, pt, BundleSide::Dual);
  return poisson_tensor_apply(alg, conn, pt, a, b, s);
}

/// The bracket of two expressions as a new expression, built from the chart's
/// symbolic entries. Lets nested brackets be differentiated exactly.
inline Expr bracket_expression(const AlgebroidChart& alg, const Expr& F, const Expr& G, Sign s) {
  const SymbolicChart* sym = alg.symbolic();
  if (!sym) throw InputError("bracket_expression needs an expression-defined chart");
  const int n = sym->base_dim;
  const int m = sym->fiber_dim;
  std::vector<Expr> fm, gm, fq, gq;
  for (int I = 0; I < m; ++I) {
    fm.push_back(differentiate(F, fiber_var(I)));
    gm.push_back(differentiate(G, fiber_var(I)));
  }
  for (int i = 0; i < n; ++i) {
    fq.push_back(differentiate(F, base_var(i)));
    gq.push_back(differentiate(G, base_var(i)));
  }
  Expr total = Expr::constant(0.0);
  for (int K = 0; K < m; ++K) {
    Expr inner = Expr::constant(0.0);
    for (int I = 0; I < m; ++I)
      for (int J = 0; J < m; ++J) {
        const Expr& c = sym->c(K, I, J);
        if (c.is_zero() || fm[I].is_zero() || gm[J].is_zero()) continue;
        inner = inner + c * fm[I] * gm[J];
      }
    if (!inner.is_zero()) total = total + inner * Expr::variable(fiber_var(K));
  }
  for (int i = 0; i < n; ++i)
    for (int I = 0; I < m; ++I) {
      const Expr& r = sym->rho(i, I);
      if (r.is_zero()) continue;
      total = total + r * (fm[I] * gq[i] - fq[i] * gm[I]);
    }
  return s == Sign::Plus ? total : -total;
}

/// Φ_X as a ScalarField on A*: value ⟨μ, X(q)⟩, ∂/∂μ = X, ∂/∂q^i = μ·∂_i X.
inline ScalarField linear_observable_field(const SectionField& X) {
  const int n = X.base_dim();
  const int m = X.fiber_dim();
  if (const auto* es = X.expressions()) {
    Expr e = Expr::constant(0.0);
    for (int I = 0; I < m; ++I) e = e + Expr::variable(fiber_var(I)) * (*es)[static_cast<std::size_t>(I)];
    return ScalarField::from_expression(e, n, m);
  }
  return ScalarField::from_function(
      n, m, [X](const Vec& q, const Vec& mu) { return mu.dot(X(q)); },
      [X](const Vec& q, const Vec& mu) -> Vec { return X.jacobian(q).transpose() * mu; },
      [X](const Vec& q, const Vec&) { return X(q); });
}

struct BracketReport {
  double xy_residual = 0.0;  // {Φ_X,Φ_Y} ∓ Φ_[X,Y]
  double xg_residual = 0.0;  // {Φ_X, g∘π} ∓ ρ(X)[g]
  double fg_residual = 0.0;  // {f∘π, g∘π}
  bool pass = false;
};

/// Checks the three defining bracket relations at the sample points using
/// bracket_connection. f and g are fields on A* that must not depend on μ.
inline BracketReport verify_bracket_relations(const AlgebroidChart& alg, const TQConnection& conn,
                                              const SectionField& X, const SectionField& Y, const ScalarField& f,
                                              const ScalarField& g, const std::vector<PhasePoint>& pts, Sign s,
                                              double tol) {
  if (!(tol > 0.0)) throw InputError("verify_bracket_relations: tol must be positive");
  const ScalarField phi_x = linear_observable_field(X);
  const ScalarField phi_y = linear_observable_field(Y);
  const double sg = sign_value(s);
  BracketReport r;
  for (const PhasePoint& pt : pts) {
    const double xy = bracket_connection(alg, conn, phi_x, phi_y, pt, s);
    const double xy_expected = sg * pt.mu.dot(section_bracket(alg, X, Y, pt.q));
    r.xy_residual = std::max(r.xy_residual, std::abs(xy - xy_expected));

    const double xg = bracket_connection(alg, conn, phi_x, g, pt, s);
    double rho_x_g = 0.0;
    if (alg.base_dim() > 0) rho_x_g = g.dq(pt.q, pt.mu).dot(eval_anchor(alg, pt.q) * X(pt.q));
    r.xg_residual = std::max(r.xg_residual, std::abs(xg - sg * rho_x_g));

    r.fg_residual = std::max(r.fg_residual, std::abs(bracket_connection(alg, conn, f, g, pt, s)));
  }
  r.pass = r.xy_residual <= tol && r.xg_residual <= tol && r.fg_residual <= tol;
  return r;
}

}  // namespace lp
