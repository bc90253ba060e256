#pragma once

// Generalized Lie–Poisson vector field (coordinate and connection forms),
// fixed-step integration, and conservation monitoring.

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "connection.hpp"

namespace lp {

struct PhaseVelocity {
  Vec qdot;
  Vec mudot;
};

/// A named observable evaluated on phase points.
struct NamedField {
  std::string name;
  ScalarField field;
};

/// q̇^i = ∓ρ^i_I ∂H/∂μ_I,  μ̇_I = ±C^K_{IJ} ∂H/∂μ_J μ_K ± ρ^i_I ∂H/∂q^i.
inline PhaseVelocity vector_field_coords(const AlgebroidChart& alg, const Hamiltonian& H, const PhasePoint& pt,
                                         Sign s) {
  const double sg = sign_value(s);
  const Vec hm = H.dfiber(pt.q, pt.mu);
  PhaseVelocity v;
  // C^K_{IJ} h^J μ_K summed over J,K, for each I.
  v.mudot = sg * structure_pair(eval_structure(alg, pt.q), hm, pt.mu);
  if (alg.base_dim() > 0) {
    const Mat rho = eval_anchor(alg, pt.q);
    v.qdot = -sg * (rho * hm);
    v.mudot += sg * (rho.transpose() * H.dq(pt.q, pt.mu));
  } else {
    v.qdot = Vec(0);
  }
  return v;
}

/// Connection form: a = ∓dH^ver, q̇ = ρ(a), and μ̇ solved from
/// ∇̄*_a p = ±ρ*(dH^hor):
///   μ̇_I = ±ρ^i_I (dH^hor)_i + Γ^K_{iL} ρ^i_I a^L μ_K − C^K_{IJ} a^J μ_K.
inline PhaseVelocity vector_field_connection(const AlgebroidChart& alg, const TQConnection& conn,
                                             const Hamiltonian& H, const PhasePoint& pt, Sign s) {
  const double sg = sign_value(s);
  const SplitCovector dh = split_differential(alg, conn, H, pt, BundleSide::Dual);
  const Vec a = -sg * dh.ver;
  PhaseVelocity v;
  v.mudot = -structure_pair(eval_structure(alg, pt.q), a, pt.mu);
  if (alg.base_dim() > 0) {
    const Mat rho = eval_anchor(alg, pt.q);
    v.qdot = rho * a;
    v.mudot += sg * (rho.transpose() * dh.hor);
    if (!conn.is_zero()) v.mudot += rho.transpose() * christoffel_pair(conn.christoffel(pt.q), a, pt.mu);
  } else {
    v.qdot = Vec(0);
  }
  return v;
}

/// a = ∓dH^ver(p), the A-path paired with p.
inline Vec apath_value(const Hamiltonian& H, const PhasePoint& pt, Sign s) {
  return -sign_value(s) * H.dfiber(pt.q, pt.mu);
}

enum class Method { RK4, ImplicitMidpoint };

/// Which assembly of the vector field drives the integrator.
class Formulation {
 public:
  static Formulation coords() { return Formulation(); }
  static Formulation connection(TQConnection conn) {
    Formulation f;
    f.conn_ = std::move(conn);
    return f;
  }
  bool uses_connection() const { return conn_.has_value(); }
  const TQConnection& conn() const { return *conn_; }

  PhaseVelocity eval(const AlgebroidChart& alg, const Hamiltonian& H, const PhasePoint& pt, Sign s) const {
    return conn_ ? vector_field_connection(alg, *conn_, H, pt, s) : vector_field_coords(alg, H, pt, s);
  }

 private:
  std::optional<TQConnection> conn_;
};

/// Integration stopped at a non-finite state. `partial` holds the nodes
/// computed before the failure.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, double time, Trajectory partial)
      : Error(what + " at t=" + std::to_string(time)), time_(time), partial_(std::move(partial)) {}
  double time() const { return time_; }
  const Trajectory& partial() const { return partial_; }

 private:
  double time_;
  Trajectory partial_;
};

inline constexpr int kMidpointMaxIterations = 50;
inline constexpr double kMidpointTol = 1e-12;
inline constexpr double kMaxSteps = 1e8;

namespace detail {

inline Vec pack(const PhasePoint& p) {
  Vec z(p.q.size() + p.mu.size());
  z << p.q, p.mu;
  return z;
}

inline PhasePoint unpack(const Vec& z, int n) {
  return {z.head(n), z.tail(z.size() - n)};
}

inline Vec pack(const PhaseVelocity& v) {
  Vec z(v.qdot.size() + v.mudot.size());
  z << v.qdot, v.mudot;
  return z;
}

}  // namespace detail

/// Fixed-step integration on the grid t_k = t0 + k·dt, k = 0..⌊(t1−t0)/dt⌋.
/// Records the A-path a = ∓dH^ver, the observable "H", and any extra
/// observables at every node.
inline Trajectory integrate(const AlgebroidChart& alg, const Hamiltonian& H, const PhasePoint& pt0, double t0,
                            double t1, double dt, Method method, Sign s,
                            const Formulation& formulation = Formulation::coords(),
                            const std::vector<NamedField>& observables = {}) {
  if (!(dt > 0.0)) throw InputError("integrate: dt must be positive");
  if (!(t1 >= t0)) throw InputError("integrate: t1 must not precede t0");
  const double steps_real = (t1 - t0) / dt;
  if (steps_real > kMaxSteps) throw InputError("integrate: more than 1e8 steps requested");
  const auto steps = static_cast<long long>(std::floor(steps_real + 1e-9));
  const int n = alg.base_dim();
  alg.check_q(pt0.q);
  if (pt0.mu.size() != alg.fiber_dim()) throw InputError("integrate: initial mu has wrong dimension");

  Trajectory traj;
  traj.observables.emplace_back("H", std::vector<double>{});
  for (const auto& o : observables)
    if (o.name != "H") traj.observables.emplace_back(o.name, std::vector<double>{});
  traj.times.reserve(static_cast<std::size_t>(steps) + 1);

  auto record = [&](double t, const PhasePoint& p) {
    traj.times.push_back(t);
    traj.states.push_back(p);
    traj.apath.push_back(apath_value(H, p, s));
    traj.observables[0].second.push_back(H(p.q, p.mu));
    std::size_t slot = 1;
    for (const auto& o : observables)
      if (o.name != "H") traj.observables[slot++].second.push_back(o.field(p.q, p.mu));
  };

  auto f = [&](const Vec& z) { return detail::pack(formulation.eval(alg, H, detail::unpack(z, n), s)); };

  Vec z = detail::pack(pt0);
  record(t0, pt0);
  for (long long k = 1; k <= steps; ++k) {
    const double t = t0 + static_cast<double>(k) * dt;
    if (method == Method::RK4) {
      const Vec k1 = f(z);
      const Vec k2 = f(z + 0.5 * dt * k1);
      const Vec k3 = f(z + 0.5 * dt * k2);
      const Vec k4 = f(z + dt * k3);
      z += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    } else {
      Vec next = z + dt * f(z);
      bool converged = false;
      for (int it = 0; it < kMidpointMaxIterations; ++it) {
        const Vec updated = z + dt * f(0.5 * (z + next));
        const double change = (updated - next).cwiseAbs().maxCoeff();
        next = updated;
        if (!next.allFinite()) break;
        if (change <= kMidpointTol * std::max(1.0, next.cwiseAbs().maxCoeff())) {
          converged = true;
          break;
        }
      }
      if (next.allFinite() && !converged)
        throw SolverError("implicit midpoint did not converge in 50 iterations at t=" + std::to_string(t));
      z = next;
    }
    if (!z.allFinite()) throw IntegrationError("non-finite state", t, std::move(traj));
    record(t, detail::unpack(z, n));
  }
  return traj;
}

struct DriftEntry {
  std::string name;
  double max_drift = 0.0;
};

/// max_k |f(t_k) − f(t_0)| for each observable.
inline std::vector<DriftEntry> drift_report(const Trajectory& traj, const std::vector<NamedField>& observables) {
  std::vector<DriftEntry> out;
  for (const auto& o : observables) {
    DriftEntry e{o.name, 0.0};
    if (!traj.states.empty()) {
      const double f0 = o.field(traj.states.front().q, traj.states.front().mu);
      for (const auto& st : traj.states) e.max_drift = std::max(e.max_drift, std::abs(o.field(st.q, st.mu) - f0));
    }
    out.push_back(e);
  }
  return out;
}

inline double drift_of(const std::vector<DriftEntry>& report, const std::string& name) {
  for (const auto& e : report)
    if (e.name == name) return e.max_drift;
  throw InputError("drift_of: no observable named '" + name + "'");
}

}  // namespace lp
