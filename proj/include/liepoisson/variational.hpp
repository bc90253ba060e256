#pragma once

// Discrete action, admissible variations and the numerical first variation;
// Legendre transforms between hyperregular H and L; Euler–Lagrange–Poincaré
// residuals along sampled A-paths.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "dynamics.hpp"
#include "random.hpp"

namespace lp {

/// b vanishes at both endpoints; r is unconstrained. Both live on the grid of
/// the trajectory they vary.
struct VariationData {
  SampledPath b;
  SampledPath r;
};

/// S = Σ trapezoid (⟨μ, a⟩ ± H(q, μ)) dt.
inline double discrete_action(const Trajectory& traj, const Hamiltonian& H, Sign s) {
  traj.validate(true);
  if (traj.size() < 2) return 0.0;
  const double sg = sign_value(s);
  const double dt = traj.dt();
  double sum = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const PhasePoint& p = traj.states[k];
    const double w = (k == 0 || k + 1 == traj.size()) ? 0.5 : 1.0;
    sum += w * (p.mu.dot(traj.apath[k]) + sg * H(p.q, p.mu));
  }
  return sum * dt;
}

struct CoefficientVariation {
  SampledPath dq;
  SampledPath da;
};

/// δq^i = ρ^i_J b^J, δa^K = ḃ^K + C^K_{IJ} a^I b^J.
inline CoefficientVariation admissible_coefficient_variation(const AlgebroidChart& alg, const Trajectory& traj,
                                                             const SampledPath& b) {
  traj.validate(true);
  if (b.size() != traj.size()) throw InputError("variation: b is not on the trajectory grid");
  if (b.empty()) return {};
  if (!b.front().isZero(0.0) || !b.back().isZero(0.0))
    throw InputError("variation: b must vanish exactly at both endpoints");
  const SampledPath bdot = time_derivative(b, traj.dt());
  CoefficientVariation v;
  v.dq.reserve(b.size());
  v.da.reserve(b.size());
  for (std::size_t k = 0; k < b.size(); ++k) {
    const Vec& q = traj.states[k].q;
    v.dq.push_back(alg.base_dim() > 0 ? Vec(eval_anchor(alg, q) * b[k]) : Vec(0));
    v.da.push_back(bdot[k] + contract_structure(eval_structure(alg, q), traj.apath[k], b[k]));
  }
  return v;
}

inline constexpr double kVariationEpsilon = 1e-5;

/// δS as the centered difference (ε = 1e-5) of discrete_action along
/// q + ε δq, a + ε δa, μ + ε r. The difference is taken node by node before
/// the trapezoid sum, which keeps summation roundoff out of the quotient.
inline double first_variation(const AlgebroidChart& alg, const Hamiltonian& H, const Trajectory& traj,
                              const VariationData& var, Sign s) {
  if (var.r.size() != traj.size()) throw InputError("variation: r is not on the trajectory grid");
  const CoefficientVariation cv = admissible_coefficient_variation(alg, traj, var.b);
  if (traj.size() < 2) return 0.0;
  const double sg = sign_value(s);
  const double eps = kVariationEpsilon;
  auto integrand = [&](std::size_t k, double e) {
    const Vec q = traj.states[k].q + e * cv.dq[k];
    const Vec mu = traj.states[k].mu + e * var.r[k];
    return mu.dot(traj.apath[k] + e * cv.da[k]) + sg * H(q, mu);
  };
  double sum = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double w = (k == 0 || k + 1 == traj.size()) ? 0.5 : 1.0;
    sum += w * (integrand(k, eps) - integrand(k, -eps));
  }
  return sum * traj.dt() / (2.0 * eps);
}

/// ‖b‖∞ + ‖r‖∞ over all nodes and components.
inline double variation_norm(const VariationData& var) {
  double nb = 0.0;
  double nr = 0.0;
  for (const auto& v : var.b) nb = std::max(nb, max_abs(v));
  for (const auto& v : var.r) nr = std::max(nr, max_abs(v));
  return nb + nr;
}

/// b(t) = sin(kπ(t−t0)/T)·u and r(t) = sin(jπ(t−t0)/T)·w.
struct BumpShape {
  int k = 1;
  int j = 1;
  Vec u;
  Vec w;
};

/// k, j ∈ {1,2,3}; u, w uniform in [−1, 1]^m.
inline BumpShape random_bump(Rng& rng, int fiber_dim) {
  BumpShape s;
  s.k = rng.uniform_int(1, 3);
  s.j = rng.uniform_int(1, 3);
  s.u = rng.uniform_vec(fiber_dim, -1.0, 1.0);
  s.w = rng.uniform_vec(fiber_dim, -1.0, 1.0);
  return s;
}

/// Samples the shape on the trajectory grid; b is set to exact zeros at the ends.
inline VariationData sample_bump(const BumpShape& shape, const Trajectory& traj) {
  const double t0 = traj.times.front();
  const double span = traj.times.back() - t0;
  VariationData v;
  for (std::size_t n = 0; n < traj.size(); ++n) {
    const double x = (traj.times[n] - t0) / span;
    v.b.push_back(std::sin(shape.k * std::numbers::pi * x) * shape.u);
    v.r.push_back(std::sin(shape.j * std::numbers::pi * x) * shape.w);
  }
  v.b.front().setZero();
  v.b.back().setZero();
  return v;
}

inline VariationData bump_variation(Rng& rng, const Trajectory& traj, int fiber_dim) {
  return sample_bump(random_bump(rng, fiber_dim), traj);
}

/// The same grid and base path with μ scaled by `factor` and a recomputed
/// as ∓dH^ver; not a solution unless the flow is trivial.
inline Trajectory scale_momentum(const Trajectory& traj, const Hamiltonian& H, Sign s, double factor) {
  Trajectory out = traj;
  for (std::size_t k = 0; k < out.size(); ++k) {
    out.states[k].mu *= factor;
    out.apath[k] = apath_value(H, out.states[k], s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Legendre transforms

struct NewtonOptions {
  double tol = 1e-12;
  int max_iterations = 50;
};

inline constexpr double kLegendreResidualTol = 1e-10;

struct LegendreResult {
  double value = 0.0;
  Vec fiber_out;
};

namespace detail {

/// Solves F(x) = 0 from the seed by Newton iteration with a centered
/// finite-difference Jacobian. `scale` sets the relative tolerance. The
/// Jacobian is also checked at the accepted point, so a root of a
/// degenerate fiber map is rejected.
template <class F>
Vec newton_solve(const F& residual, Vec x, double scale, const NewtonOptions& opts) {
  const Eigen::Index m = x.size();
  const double tol = opts.tol * std::max(1.0, scale);
  for (int it = 0; it <= opts.max_iterations; ++it) {
    const Vec r = residual(x);
    if (!r.allFinite()) throw HyperregularityError("Legendre map produced a non-finite residual");
    const bool converged = max_abs(r) <= tol;
    if (!converged && it == opts.max_iterations) break;
    Mat J(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
      const double h = fd_step(x[j]);
      Vec xp = x;
      Vec xm = x;
      xp[j] += h;
      xm[j] -= h;
      J.col(j) = (residual(xp) - residual(xm)) / (2.0 * h);
    }
    Eigen::FullPivLU<Mat> lu(J);
    lu.setThreshold(1e-10);
    if (J.cwiseAbs().maxCoeff() == 0.0 || !lu.isInvertible())
      throw HyperregularityError("fiber derivative is singular; not hyperregular near the seed");
    const Vec step = lu.solve(r);
    if (converged) {
      // One more step from the accepted point; keeps whichever residual is smaller.
      const Vec polished = x - step;
      const Vec rp = residual(polished);
      return rp.allFinite() && max_abs(rp) <= max_abs(r) ? polished : x;
    }
    x -= step;
  }
  throw HyperregularityError("Legendre Newton iteration did not converge in " + std::to_string(opts.max_iterations) +
                             " iterations");
}

}  // namespace detail

/// Given a ∈ A_q, solve a = ∓dH^ver(q, p) for p (seed p = a) and return
/// L(q, a) = ⟨p, a⟩ ± H(q, p) together with p.
inline LegendreResult legendre_h_to_l(const Hamiltonian& H, const Vec& a, const Vec& q, Sign s,
                                      const NewtonOptions& opts = {}) {
  const double sg = sign_value(s);
  auto residual = [&](const Vec& p) -> Vec { return a + sg * H.dfiber(q, p); };
  const Vec p = detail::newton_solve(residual, a, max_abs(a), opts);
  if (max_abs(residual(p)) > kLegendreResidualTol * std::max(1.0, max_abs(a)))
    throw HyperregularityError("Legendre residual above 1e-10");
  return {p.dot(a) + sg * H(q, p), p};
}

/// Given p ∈ A*_q, solve p = dL^ver(q, a) for a (seed a = p) and return
/// H(q, p) = ∓(⟨p, a⟩ − L(q, a)) together with a.
inline LegendreResult legendre_l_to_h(const Lagrangian& L, const Vec& p, const Vec& q, Sign s,
                                      const NewtonOptions& opts = {}) {
  const double sg = sign_value(s);
  auto residual = [&](const Vec& a) -> Vec { return L.dfiber(q, a) - p; };
  const Vec a = detail::newton_solve(residual, p, max_abs(p), opts);
  if (max_abs(residual(a)) > kLegendreResidualTol * std::max(1.0, max_abs(p)))
    throw HyperregularityError("Legendre residual above 1e-10");
  return {-sg * (p.dot(a) - L(q, a)), a};
}

enum class LegendreDirection { HtoL, LtoH };

/// Dispatches on direction. For HtoL `field` is H and fiber_in is a; for
/// LtoH `field` is L and fiber_in is p.
inline LegendreResult legendre(LegendreDirection dir, const ScalarField& field, const Vec& fiber_in, const Vec& q,
                               Sign s, const NewtonOptions& opts = {}) {
  return dir == LegendreDirection::HtoL ? legendre_h_to_l(field, fiber_in, q, s, opts)
                                        : legendre_l_to_h(field, fiber_in, q, s, opts);
}

/// The Lagrangian of a hyperregular H as a field on A. Each evaluation runs
/// the HtoL solve; partials use dL/da = p and dL/dq = ±dH/dq at p.
inline Lagrangian legendre_lagrangian(const Hamiltonian& H, Sign s, const NewtonOptions& opts = {}) {
  const double sg = sign_value(s);
  return ScalarField::from_function(
      H.base_dim(), H.fiber_dim(), [H, s, opts](const Vec& q, const Vec& a) { return legendre_h_to_l(H, a, q, s, opts).value; },
      [H, s, sg, opts](const Vec& q, const Vec& a) -> Vec {
        return sg * H.dq(q, legendre_h_to_l(H, a, q, s, opts).fiber_out);
      },
      [H, s, opts](const Vec& q, const Vec& a) { return legendre_h_to_l(H, a, q, s, opts).fiber_out; });
}

/// max over nodes of ‖∇̄*_a(dL^ver(a)) − ρ*(dL^hor(a))‖ along the recorded A-path.
inline double elp_residual(const AlgebroidChart& alg, const TQConnection& conn, const Lagrangian& L,
                           const Trajectory& traj) {
  traj.validate(true);
  SampledPath p;
  std::vector<SplitCovector> dl;
  p.reserve(traj.size());
  dl.reserve(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    dl.push_back(split_differential(alg, conn, L, traj.states[k].q, traj.apath[k], BundleSide::Total));
    p.push_back(dl.back().ver);
  }
  const SampledPath lhs = nabla_bar_dual_path(alg, conn, traj, p);
  double worst = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    Vec r = lhs[k];
    if (alg.base_dim() > 0) r -= eval_anchor(alg, traj.states[k].q).transpose() * dl[k].hor;
    worst = std::max(worst, r.norm());
  }
  return worst;
}

}  // namespace lp
