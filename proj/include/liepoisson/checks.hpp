#pragma once

// Randomized verification suites over a SystemBundle. Each returns the
// measured residuals and a pass flag against caller-supplied tolerances.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "catalog.hpp"
#include "poisson.hpp"
#include "polynomial.hpp"
#include "variational.hpp"

namespace lp {

struct StructureSuiteOptions {
  int samples = 20;
  double h = 1e-5;
  double tol = 1e-7;
};

inline StructureReport structure_suite(const SystemBundle& sys, Rng& rng, const StructureSuiteOptions& o = {}) {
  std::vector<Vec> qs;
  for (int k = 0; k < o.samples; ++k) qs.push_back(sys.random_q(rng));
  return check_structure_equations(sys.alg, qs, o.h, o.tol);
}

struct EquivalenceOptions {
  int states = 100;
  int connections = 5;
  double tol = 1e-9;
};

struct EquivalenceReport {
  double max_diff = 0.0;      // coords vs connection form
  double gamma_spread = 0.0;  // connection form across Γ draws
  bool pass = false;
};

/// Both vector-field assemblies at the same random states under several
/// random polynomial Γ.
inline EquivalenceReport equivalence_suite(const SystemBundle& sys, Rng& rng, const EquivalenceOptions& o = {}) {
  const int n = sys.alg.base_dim();
  const int m = sys.alg.fiber_dim();
  std::vector<PhasePoint> pts;
  for (int k = 0; k < o.states; ++k) pts.push_back(sys.random_state(rng));
  std::vector<TQConnection> conns;
  for (int c = 0; c < o.connections; ++c) conns.push_back(random_connection(rng, n, m));
  EquivalenceReport r;
  for (const PhasePoint& pt : pts) {
    const PhaseVelocity ref = vector_field_coords(sys.alg, sys.H, pt, sys.sign);
    Vec first;
    for (std::size_t c = 0; c < conns.size(); ++c) {
      const PhaseVelocity v = vector_field_connection(sys.alg, conns[c], sys.H, pt, sys.sign);
      Vec z(n + m);
      z << v.qdot, v.mudot;
      Vec zr(n + m);
      zr << ref.qdot, ref.mudot;
      r.max_diff = std::max(r.max_diff, max_abs(z - zr));
      if (c == 0) first = z;
      else r.gamma_spread = std::max(r.gamma_spread, max_abs(z - first));
    }
  }
  r.pass = r.max_diff <= o.tol && r.gamma_spread <= o.tol;
  return r;
}

struct BracketLawOptions {
  int draws = 100;
  int degree = 2;
  int terms = 3;
  double antisymmetry_tol = 1e-12;
  double leibniz_tol = 1e-8;
  double jacobi_tol = 1e-6;
  double equality_tol = 1e-9;
};

struct BracketLawReport {
  double antisymmetry = 0.0;
  double leibniz = 0.0;
  double jacobi = 0.0;
  double coords_vs_connection = 0.0;
  bool pass = false;
};

/// Antisymmetry, Leibniz and Jacobi on random polynomial functions, with the
/// inner brackets of Jacobi built symbolically; plus agreement of the
/// coordinate bracket with the Poisson-tensor form under a random Γ.
inline BracketLawReport bracket_law_suite(const SystemBundle& sys, Rng& rng, const BracketLawOptions& o = {}) {
  const int n = sys.alg.base_dim();
  const int m = sys.alg.fiber_dim();
  const Sign s = sys.sign;
  auto poly = [&] { return random_polynomial(rng, n, m, o.degree, o.terms); };
  auto field = [&](const Expr& e) { return ScalarField::from_expression(e, n, m); };
  BracketLawReport r;
  for (int d = 0; d < o.draws; ++d) {
    const Expr fe = poly(), ge = poly(), ke = poly();
    const ScalarField F = field(fe), G = field(ge), K = field(ke);
    const TQConnection conn = random_connection(rng, n, m);
    const PhasePoint pt = sys.random_state(rng);

    const double fg = bracket_coords(sys.alg, F, G, pt, s);
    r.antisymmetry = std::max(r.antisymmetry, std::abs(fg + bracket_coords(sys.alg, G, F, pt, s)));

    const double lhs = bracket_coords(sys.alg, F, G * K, pt, s);
    const double rhs = fg * K(pt.q, pt.mu) + G(pt.q, pt.mu) * bracket_coords(sys.alg, F, K, pt, s);
    r.leibniz = std::max(r.leibniz, std::abs(lhs - rhs));

    const double jac = bracket_coords(sys.alg, F, field(bracket_expression(sys.alg, ge, ke, s)), pt, s) +
                       bracket_coords(sys.alg, G, field(bracket_expression(sys.alg, ke, fe, s)), pt, s) +
                       bracket_coords(sys.alg, K, field(bracket_expression(sys.alg, fe, ge, s)), pt, s);
    r.jacobi = std::max(r.jacobi, std::abs(jac));

    r.coords_vs_connection =
        std::max(r.coords_vs_connection, std::abs(fg - bracket_connection(sys.alg, conn, F, G, pt, s)));
  }
  r.pass = r.antisymmetry <= o.antisymmetry_tol && r.leibniz <= o.leibniz_tol && r.jacobi <= o.jacobi_tol &&
           r.coords_vs_connection <= o.equality_tol;
  return r;
}

struct RelationOptions {
  int draws = 5;
  int points = 20;
  double tol = 1e-7;
};

/// verify_bracket_relations with random non-constant polynomial sections X, Y,
/// base functions f, g and Γ.
inline BracketReport relations_suite(const SystemBundle& sys, Rng& rng, const RelationOptions& o = {}) {
  const int n = sys.alg.base_dim();
  const int m = sys.alg.fiber_dim();
  BracketReport total;
  total.pass = true;
  auto section = [&] {
    std::vector<Expr> es;
    for (int I = 0; I < m; ++I) es.push_back(random_base_polynomial(rng, n, 2, 3));
    return SectionField::from_expressions(n, std::move(es));
  };
  for (int d = 0; d < o.draws; ++d) {
    const SectionField X = section();
    const SectionField Y = section();
    const ScalarField f = ScalarField::from_expression(random_base_polynomial(rng, n, 2, 3), n, m);
    const ScalarField g = ScalarField::from_expression(random_base_polynomial(rng, n, 2, 3), n, m);
    const TQConnection conn = random_connection(rng, n, m);
    std::vector<PhasePoint> pts;
    for (int k = 0; k < o.points; ++k) pts.push_back(sys.random_state(rng));
    const BracketReport r = verify_bracket_relations(sys.alg, conn, X, Y, f, g, pts, sys.sign, o.tol);
    total.xy_residual = std::max(total.xy_residual, r.xy_residual);
    total.xg_residual = std::max(total.xg_residual, r.xg_residual);
    total.fg_residual = std::max(total.fg_residual, r.fg_residual);
    total.pass = total.pass && r.pass;
  }
  return total;
}

struct VariationSuiteOptions {
  double t1 = 2.0;
  double dt = 1e-3;
  int variations = 10;
  double normalized_tol = 1e-4;  // |δS| / (‖b‖∞ + ‖r‖∞) at dt
  double rate_lo = 3.5;          // accepted band for |δS(dt)| / |δS(dt/2)|, per variation
  double rate_hi = 4.5;
  double perturb_factor = 1.5;
  double perturbed_min = 1e-2;
};

struct VariationReport {
  double max_normalized = 0.0;        // at dt
  double max_normalized_half = 0.0;   // at dt/2
  double aggregate_rate = 0.0;        // Σ|δS(dt)| / Σ|δS(dt/2)|
  double min_rate = std::numeric_limits<double>::infinity();
  double max_rate = 0.0;
  double perturbed_max = 0.0;
  bool pass = false;
};

/// First variation on the integrated solution from the bundle's first start,
/// at dt and dt/2 with the same variation shapes, and on the solution with
/// μ scaled (a non-solution).
inline VariationReport variation_suite(const SystemBundle& sys, Rng& rng, const VariationSuiteOptions& o = {}) {
  const PhasePoint& start = sys.starts.front();
  const int m = sys.alg.fiber_dim();
  const Trajectory coarse = integrate(sys.alg, sys.H, start, 0.0, o.t1, o.dt, Method::RK4, sys.sign);
  const Trajectory fine = integrate(sys.alg, sys.H, start, 0.0, o.t1, o.dt / 2.0, Method::RK4, sys.sign);
  const Trajectory perturbed = scale_momentum(coarse, sys.H, sys.sign, o.perturb_factor);
  VariationReport r;
  double sum_coarse = 0.0;
  double sum_fine = 0.0;
  for (int k = 0; k < o.variations; ++k) {
    const BumpShape shape = random_bump(rng, m);
    const VariationData vc = sample_bump(shape, coarse);
    const VariationData vf = sample_bump(shape, fine);
    const double sc = std::abs(first_variation(sys.alg, sys.H, coarse, vc, sys.sign));
    const double sf = std::abs(first_variation(sys.alg, sys.H, fine, vf, sys.sign));
    r.max_normalized = std::max(r.max_normalized, sc / variation_norm(vc));
    r.max_normalized_half = std::max(r.max_normalized_half, sf / variation_norm(vf));
    sum_coarse += sc;
    sum_fine += sf;
    const double rate = sc / sf;
    r.min_rate = std::min(r.min_rate, rate);
    r.max_rate = std::max(r.max_rate, rate);
    r.perturbed_max =
        std::max(r.perturbed_max, std::abs(first_variation(sys.alg, sys.H, perturbed, sample_bump(shape, perturbed),
                                                           sys.sign)));
  }
  r.aggregate_rate = sum_coarse / sum_fine;
  r.pass = r.max_normalized <= o.normalized_tol && r.max_normalized_half < r.max_normalized &&
           r.min_rate >= o.rate_lo && r.max_rate <= o.rate_hi && r.perturbed_max >= o.perturbed_min;
  return r;
}

struct ElpSuiteOptions {
  int states = 100;
  double roundtrip_tol = 1e-9;
  double t1 = 2.0;
  double dt = 1e-3;
  double elp_tol = 1e-5;
};

struct ElpReport {
  double roundtrip = 0.0;  // |H after HtoL→LtoH − H|, max over states
  double momentum = 0.0;   // |p recovered − μ|
  double elp = 0.0;
  bool pass = false;
};

/// Legendre round trip at random states and the Euler–Lagrange–Poincaré
/// residual of the H-flow with the transformed Lagrangian.
inline ElpReport elp_suite(const SystemBundle& sys, Rng& rng, const ElpSuiteOptions& o = {}) {
  const Lagrangian L = legendre_lagrangian(sys.H, sys.sign);
  ElpReport r;
  for (int k = 0; k < o.states; ++k) {
    const PhasePoint pt = sys.random_state(rng);
    const Vec a = apath_value(sys.H, pt, sys.sign);
    const LegendreResult to_l = legendre_h_to_l(sys.H, a, pt.q, sys.sign);
    r.momentum = std::max(r.momentum, max_abs(to_l.fiber_out - pt.mu));
    const LegendreResult back = legendre_l_to_h(L, to_l.fiber_out, pt.q, sys.sign);
    r.roundtrip = std::max(r.roundtrip, std::abs(back.value - sys.H(pt.q, pt.mu)));
  }
  const Trajectory traj = integrate(sys.alg, sys.H, sys.starts.front(), 0.0, o.t1, o.dt, Method::RK4, sys.sign);
  r.elp = elp_residual(sys.alg, sys.conn, L, traj);
  r.pass = r.roundtrip <= o.roundtrip_tol && r.elp <= o.elp_tol;
  return r;
}

}  // namespace lp
