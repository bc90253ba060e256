#pragma once

#include <Eigen/Dense>

#include <initializer_list>

#include "liepoisson/liepoisson.hpp"

namespace lptest {

inline lp::Vec vec(std::initializer_list<double> xs) {
  lp::Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index k = 0;
  for (double x : xs) v[k++] = x;
  return v;
}

inline lp::Expr parse(const char* src, int n, int m, char letter = 'p') {
  return lp::parse_expression(src, lp::Scope{n, m, letter, true});
}

inline lp::ScalarField field(const char* src, int n, int m) {
  return lp::ScalarField::from_expression(parse(src, n, m), n, m);
}

/// Tangent bundle of R^n: ρ = I, C = 0.
inline lp::AlgebroidChart tangent_chart(int n) {
  lp::SymbolicChart s;
  s.base_dim = n;
  s.fiber_dim = n;
  s.anchor.assign(static_cast<std::size_t>(n * n), lp::Expr::constant(0.0));
  s.structure.assign(static_cast<std::size_t>(n * n * n), lp::Expr::constant(0.0));
  for (int i = 0; i < n; ++i) s.anchor[static_cast<std::size_t>(i * n + i)] = lp::Expr::constant(1.0);
  return lp::AlgebroidChart::from_expressions(std::move(s));
}

inline lp::AlgebroidChart so3_chart() { return lp::build_rigid_body().alg; }
inline lp::AlgebroidChart heavy_top_chart() { return lp::build_heavy_top().alg; }

/// Uniform grid trajectory with given q, μ and a samples.
template <class Q, class Mu, class A>
lp::Trajectory sampled(double t0, double t1, double dt, Q q, Mu mu, A a) {
  lp::Trajectory tr;
  const int steps = static_cast<int>(std::llround((t1 - t0) / dt));
  for (int k = 0; k <= steps; ++k) {
    const double t = t0 + k * dt;
    tr.times.push_back(t);
    tr.states.push_back({q(t), mu(t)});
    tr.apath.push_back(a(t));
  }
  return tr;
}

}  // namespace lptest
