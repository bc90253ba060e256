#pragma once

// Built-in example systems: pendulum, free rigid body, heavy top, charged
// particle in a magnetic field, and builders for split Atiyah algebroids.
// All quantities are dimensionless.

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "metric.hpp"
#include "random.hpp"

namespace lp {

struct Observable {
  std::string name;
  ScalarField field;
  bool conserved = true;
};

struct SystemBundle {
  std::string name;
  AlgebroidChart alg;
  TQConnection conn;
  Hamiltonian H;
  std::optional<BundleMetric> gm;
  std::optional<Potential> U;
  std::vector<Observable> observables;
  Sign sign = Sign::Minus;
  std::vector<PhasePoint> starts;
  double box = 1.0;  // base samples are drawn from [−box, box]^n

  std::vector<NamedField> named_observables() const {
    std::vector<NamedField> out;
    for (const auto& o : observables) out.push_back({o.name, o.field});
    return out;
  }

  Vec random_q(Rng& rng) const { return rng.uniform_vec(alg.base_dim(), -box, box); }

  PhasePoint random_state(Rng& rng) const {
    PhasePoint p;
    p.q = random_q(rng);
    p.mu = rng.uniform_vec(alg.fiber_dim(), -1.0, 1.0);
    return p;
  }
};

namespace detail {

inline Expr qv(int i) { return Expr::variable(base_var(i)); }
inline Expr pv(int I) { return Expr::variable(fiber_var(I)); }

inline SymbolicChart empty_chart(int n, int m) {
  SymbolicChart s;
  s.base_dim = n;
  s.fiber_dim = m;
  s.anchor.assign(static_cast<std::size_t>(n * m), Expr::constant(0.0));
  s.structure.assign(static_cast<std::size_t>(m * m * m), Expr::constant(0.0));
  return s;
}

inline Expr& c_entry(SymbolicChart& s, int K, int I, int J) {
  return s.structure[static_cast<std::size_t>((K * s.fiber_dim + I) * s.fiber_dim + J)];
}

inline Expr& rho_entry(SymbolicChart& s, int i, int I) {
  return s.anchor[static_cast<std::size_t>(i * s.fiber_dim + I)];
}

/// ε_{IJK} with 0-based indices.
inline double levi_civita(int i, int j, int k) { return static_cast<double>((i - j) * (j - k) * (k - i)) / 2.0; }

/// Places so(3) structure constants C^{off+K}_{off+I, off+J} = ε_{IJK}.
inline void add_so3(SymbolicChart& s, int off) {
  for (int I = 0; I < 3; ++I)
    for (int J = 0; J < 3; ++J)
      for (int K = 0; K < 3; ++K) {
        const double e = levi_civita(I, J, K);
        if (e != 0.0) c_entry(s, off + K, off + I, off + J) = Expr::constant(e);
      }
}

inline ScalarField field(const Expr& e, int n, int m) { return ScalarField::from_expression(e, n, m); }

inline Expr rigid_body_energy(const std::array<double, 3>& inertia) {
  Expr h = Expr::constant(0.0);
  for (int I = 0; I < 3; ++I) h = h + 0.5 * pv(I) * pv(I) / inertia[static_cast<std::size_t>(I)];
  return h;
}

inline Mat diagonal(const std::array<double, 3>& d) {
  Mat g = Mat::Zero(3, 3);
  for (int I = 0; I < 3; ++I) g(I, I) = d[static_cast<std::size_t>(I)];
  return g;
}

inline void check_inertia(const std::array<double, 3>& inertia) {
  for (double v : inertia)
    if (!(v > 0.0) || !std::isfinite(v)) throw InputError("inertia entries must be positive and finite");
}

}  // namespace detail

/// n = m = 1, ρ = 1, C = 0, H = p²/2 + 1 − cos q.
inline SystemBundle build_pendulum() {
  using detail::pv;
  using detail::qv;
  SymbolicChart s = detail::empty_chart(1, 1);
  detail::rho_entry(s, 0, 0) = Expr::constant(1.0);
  const Expr u = 1.0 - cos(qv(0));
  const Expr h = 0.5 * pv(0) * pv(0) + u;
  SystemBundle b;
  b.name = "pendulum";
  b.alg = AlgebroidChart::from_expressions(std::move(s));
  b.conn = TQConnection::zero(1, 1);
  b.H = detail::field(h, 1, 1);
  b.gm = BundleMetric::constant(1, Mat::Identity(1, 1));
  b.U = detail::field(u, 1, 0);
  b.observables = {{"H", b.H, true}};
  b.starts = {{Vec::Zero(1), Vec::Ones(1)}, {Vec::Constant(1, 1.0), Vec::Zero(1)}};
  return b;
}

struct RigidBodyParams {
  std::array<double, 3> inertia{1.0, 2.0, 3.0};
};

/// n = 0, m = 3, C = so(3), H = ½ Σ μ_I² / I_I.
inline SystemBundle build_rigid_body(const RigidBodyParams& p = {}) {
  using detail::pv;
  detail::check_inertia(p.inertia);
  SymbolicChart s = detail::empty_chart(0, 3);
  detail::add_so3(s, 0);
  const Expr h = detail::rigid_body_energy(p.inertia);
  SystemBundle b;
  b.name = "rigid_body";
  b.alg = AlgebroidChart::from_expressions(std::move(s));
  b.conn = TQConnection::zero(0, 3);
  b.H = detail::field(h, 0, 3);
  b.gm = BundleMetric::constant(0, detail::diagonal(p.inertia));
  b.U = ScalarField::constant(0, 0, 0.0);
  b.observables = {{"H", b.H, true},
                   {"casimir", detail::field(pv(0) * pv(0) + pv(1) * pv(1) + pv(2) * pv(2), 0, 3), true}};
  b.starts = {{Vec(0), Vec::Ones(3)}, {Vec(0), Vec::Unit(3, 0)}};
  return b;
}

struct HeavyTopParams {
  std::array<double, 3> inertia{1.0, 2.0, 3.0};
  double mgl = 1.0;
  std::array<double, 3> chi{0.0, 0.0, 1.0};
};

/// Action algebroid so(3) × R³ → R³: q is the body-frame vertical, ρ(q)ξ = q×ξ
/// (so q̇ = q×Ω), C = so(3), H = ½⟨μ, I⁻¹μ⟩ + mgl χ·q.
/// The opposite orientation of ρ flips the signs of q̇ and of the gravity torque.
inline SystemBundle build_heavy_top(const HeavyTopParams& p = {}) {
  using detail::pv;
  using detail::qv;
  detail::check_inertia(p.inertia);
  const double chi_norm = std::sqrt(p.chi[0] * p.chi[0] + p.chi[1] * p.chi[1] + p.chi[2] * p.chi[2]);
  if (std::abs(chi_norm - 1.0) > 1e-12) throw InputError("heavy top: chi must be a unit vector");
  SymbolicChart s = detail::empty_chart(3, 3);
  detail::add_so3(s, 0);
  // ρ^i_I = ε_{i j I} q_j.
  for (int i = 0; i < 3; ++i)
    for (int I = 0; I < 3; ++I) {
      Expr e = Expr::constant(0.0);
      for (int j = 0; j < 3; ++j) {
        const double eps = detail::levi_civita(i, j, I);
        if (eps != 0.0) e = e + eps * qv(j);
      }
      detail::rho_entry(s, i, I) = e;
    }
  Expr u = Expr::constant(0.0);
  for (int i = 0; i < 3; ++i)
    if (p.chi[static_cast<std::size_t>(i)] != 0.0) u = u + p.mgl * p.chi[static_cast<std::size_t>(i)] * qv(i);
  const Expr h = detail::rigid_body_energy(p.inertia) + u;
  SystemBundle b;
  b.name = "heavy_top";
  b.alg = AlgebroidChart::from_expressions(std::move(s));
  b.conn = TQConnection::zero(3, 3);
  b.H = detail::field(h, 3, 3);
  b.gm = BundleMetric::constant(3, detail::diagonal(p.inertia));
  b.U = detail::field(u, 3, 0);
  b.observables = {{"H", b.H, true},
                   {"q_norm2", detail::field(qv(0) * qv(0) + qv(1) * qv(1) + qv(2) * qv(2), 3, 3), true},
                   {"mu_dot_q", detail::field(pv(0) * qv(0) + pv(1) * qv(1) + pv(2) * qv(2), 3, 3), true}};
  Vec q0(3), mu0(3);
  q0 << 0.3, 0.2, std::sqrt(1.0 - 0.13);
  mu0 << 0.5, -0.2, 1.0;
  Vec q1 = Vec::Unit(3, 2);
  Vec mu1(3);
  mu1 << 0.1, 0.4, 2.0;
  b.starts = {{q0, mu0}, {q1, mu1}};
  return b;
}

/// Split Atiyah algebroid TQ ⊕ (Q × R) for an abelian potential A on R^n:
/// fibers (v¹..vⁿ, charge slot), ρ = [I_n | 0], C^{n+1}_{ij} = −(∂_i A_j − ∂_j A_i).
inline AlgebroidChart build_atiyah_abelian(int n, const std::vector<Expr>& potential) {
  if (static_cast<int>(potential.size()) != n) throw InputError("atiyah: potential needs n components");
  SymbolicChart s = detail::empty_chart(n, n + 1);
  for (int i = 0; i < n; ++i) detail::rho_entry(s, i, i) = Expr::constant(1.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const Expr curv = differentiate(potential[static_cast<std::size_t>(j)], base_var(i)) -
                        differentiate(potential[static_cast<std::size_t>(i)], base_var(j));
      detail::c_entry(s, n, i, j) = -curv;
    }
  return AlgebroidChart::from_expressions(std::move(s));
}

/// Split Atiyah algebroid TQ ⊕ (Q × g) for a Lie algebra with structure
/// constants c^a_{bc} (Tensor3 indexed (a, b, c)) and potential A^a_i
/// (`potential[a*n + i]`). The frame is (∂_1..∂_n, e_1..e_k) with
///   C^{n+a}_{ij}     = −(∂_i A^a_j − ∂_j A^a_i + c^a_{bc} A^b_i A^c_j)
///   C^{n+a}_{i,n+b}  = c^a_{cb} A^c_i = −C^{n+a}_{n+b,i}
///   C^{n+a}_{n+b,n+c} = −c^a_{bc}
/// which is the bracket of the lifts h_i = (∂_i, −A_i) and e_a under the
/// right-invariant (sign-reversed) bracket on the vertical part.
inline AlgebroidChart build_atiyah(int n, const Tensor3& algebra, const std::vector<Expr>& potential) {
  const int k = algebra.dim0();
  if (algebra.dim1() != k || algebra.dim2() != k) throw InputError("atiyah: structure constants must be k×k×k");
  if (static_cast<int>(potential.size()) != n * k) throw InputError("atiyah: potential needs n*k components");
  auto A = [&](int a, int i) -> const Expr& { return potential[static_cast<std::size_t>(a * n + i)]; };
  SymbolicChart s = detail::empty_chart(n, n + k);
  for (int i = 0; i < n; ++i) detail::rho_entry(s, i, i) = Expr::constant(1.0);
  for (int a = 0; a < k; ++a) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        Expr f = differentiate(A(a, j), base_var(i)) - differentiate(A(a, i), base_var(j));
        for (int b = 0; b < k; ++b)
          for (int c = 0; c < k; ++c)
            if (algebra(a, b, c) != 0.0) f = f + algebra(a, b, c) * A(b, i) * A(c, j);
        detail::c_entry(s, n + a, i, j) = -f;
      }
    for (int i = 0; i < n; ++i)
      for (int b = 0; b < k; ++b) {
        Expr e = Expr::constant(0.0);
        for (int c = 0; c < k; ++c)
          if (algebra(a, c, b) != 0.0) e = e + algebra(a, c, b) * A(c, i);
        detail::c_entry(s, n + a, i, n + b) = e;
        detail::c_entry(s, n + a, n + b, i) = -e;
      }
    for (int b = 0; b < k; ++b)
      for (int c = 0; c < k; ++c)
        if (algebra(a, b, c) != 0.0) detail::c_entry(s, n + a, n + b, n + c) = Expr::constant(-algebra(a, b, c));
  }
  return AlgebroidChart::from_expressions(std::move(s));
}

struct ChargedParticleParams {
  double mass = 1.0;
  double field = 1.0;  // uniform B along the third axis
  double charge = 1.0;
};

/// Uniform magnetic field B e₃ via A = (−B q²/2, B q¹/2, 0); fibers
/// (y₁, y₂, y₃, μ̄) with μ̄ the charge; H = ‖y‖² / (2 mass).
inline SystemBundle build_charged_particle(const ChargedParticleParams& p = {}) {
  using detail::pv;
  using detail::qv;
  if (!(p.mass > 0.0)) throw InputError("charged particle: mass must be positive");
  const std::vector<Expr> potential{-0.5 * p.field * qv(1), 0.5 * p.field * qv(0), Expr::constant(0.0)};
  const Expr h = (pv(0) * pv(0) + pv(1) * pv(1) + pv(2) * pv(2)) / (2.0 * p.mass);
  SystemBundle b;
  b.name = "charged_particle";
  b.alg = build_atiyah_abelian(3, potential);
  b.conn = TQConnection::zero(3, 4);
  b.H = detail::field(h, 3, 4);
  b.observables = {{"H", b.H, true}, {"charge", detail::field(pv(3), 3, 4), true}};
  Vec mu0(4);
  mu0 << p.mass, 0.0, 0.0, p.charge;  // unit speed perpendicular to B
  Vec mu1(4);
  mu1 << 0.3 * p.mass, -0.4 * p.mass, 0.2 * p.mass, p.charge;
  b.starts = {{Vec::Zero(3), mu0}, {Vec::Zero(3), mu1}};
  return b;
}

struct CatalogEntry {
  std::string name;
  std::string params;
};

inline std::vector<CatalogEntry> list_systems() {
  return {{"pendulum", "(none)"},
          {"rigid_body", "inertia: [I1, I2, I3] (default [1, 2, 3])"},
          {"heavy_top", "inertia: [I1, I2, I3] (default [1, 2, 3]), mgl: real (default 1), chi: unit 3-vector "
                        "(default [0, 0, 1])"},
          {"charged_particle", "mass: real (default 1), field: real B (default 1), charge: real (default 1)"}};
}

}  // namespace lp
