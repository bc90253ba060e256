#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"

using lptest::vec;

namespace {

std::vector<lp::SystemBundle> all_systems() {
  return {lp::build_pendulum(), lp::build_rigid_body(), lp::build_heavy_top(), lp::build_charged_particle()};
}

lp::Vec cross(const lp::Vec& a, const lp::Vec& b) {
  return vec({a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]});
}

lp::Vec field_at(const lp::SystemBundle& s, const lp::PhasePoint& pt) {
  const auto v = lp::vector_field_coords(s.alg, s.H, pt, s.sign);
  lp::Vec z(v.qdot.size() + v.mudot.size());
  z << v.qdot, v.mudot;
  return z;
}

}  // namespace

TEST(Pendulum, FieldAtBottom) {
  EXPECT_EQ(field_at(lp::build_pendulum(), {vec({0.0}), vec({1.0})}), vec({1.0, 0.0}));
}

TEST(Pendulum, FieldAtQuarterTurn) {
  EXPECT_LE(lp::max_abs(field_at(lp::build_pendulum(), {vec({std::numbers::pi / 2}), vec({0.0})}) - vec({0.0, -1.0})),
            1e-15);
}

TEST(Pendulum, StructureResidualsVanish) {
  const auto r = lp::check_structure_equations(lp::build_pendulum().alg, {vec({0.3}), vec({-2.0})}, 1e-5, 1e-7);
  EXPECT_EQ(std::max({r.anchor_residual, r.jacobi_residual, r.antisymmetry_residual}), 0.0);
}

TEST(RigidBody, EulerEquationsAtOnes) {
  EXPECT_LE(lp::max_abs(field_at(lp::build_rigid_body({{1, 2, 3}}), {lp::Vec(0), vec({1, 1, 1})}) -
                        vec({-1.0 / 6.0, 2.0 / 3.0, -0.5})),
            1e-15);
}

TEST(RigidBody, MajorAxisEquilibrium) {
  EXPECT_EQ(lp::max_abs(field_at(lp::build_rigid_body(), {lp::Vec(0), vec({1, 0, 0})})), 0.0);
}

TEST(RigidBody, IntermediateAxisIsUnstableButConservative) {
  const auto rb = lp::build_rigid_body();
  const auto tr = lp::integrate(rb.alg, rb.H, {lp::Vec(0), vec({1e-4, 1.0, 1e-4})}, 0.0, 40.0, 1e-3, lp::Method::RK4,
                                rb.sign);
  double excursion = 0.0;
  for (const auto& s : tr.states) excursion = std::max(excursion, std::abs(s.mu[0]));
  EXPECT_GT(excursion, 0.1);
  const auto d = lp::drift_report(tr, rb.named_observables());
  EXPECT_LE(lp::drift_of(d, "H"), 1e-8);
  EXPECT_LE(lp::drift_of(d, "casimir"), 1e-8);
}

TEST(RigidBody, RejectsNonPositiveInertia) {
  EXPECT_THROW(lp::build_rigid_body({{1, 0, 3}}), lp::InputError);
}

TEST(HeavyTop, StructureEquations) {
  const auto ht = lp::build_heavy_top();
  lp::Rng rng(60);
  std::vector<lp::Vec> qs;
  for (int k = 0; k < 20; ++k) qs.push_back(ht.random_q(rng));
  EXPECT_TRUE(lp::check_structure_equations(ht.alg, qs, 1e-5, 1e-7).pass);
}

TEST(HeavyTop, ZeroWeightReducesToRigidBody) {
  const auto ht = lp::build_heavy_top({{1, 2, 3}, 0.0, {0, 0, 1}});
  const auto rb = lp::build_rigid_body({{1, 2, 3}});
  lp::Rng rng(61);
  for (int k = 0; k < 20; ++k) {
    const auto pt = ht.random_state(rng);
    const auto v = lp::vector_field_coords(ht.alg, ht.H, pt, ht.sign);
    const auto w = lp::vector_field_coords(rb.alg, rb.H, {lp::Vec(0), pt.mu}, rb.sign);
    EXPECT_LE(lp::max_abs(v.mudot - w.mudot), 1e-15);
  }
}

TEST(HeavyTop, ClassicalEquations) {
  // q̇ = q × Ω and μ̇ = μ × Ω + mgl q × χ with Ω = I⁻¹ μ.
  const auto ht = lp::build_heavy_top({{1, 2, 3}, 0.7, {0, 0, 1}});
  lp::Rng rng(62);
  for (int k = 0; k < 20; ++k) {
    const auto pt = ht.random_state(rng);
    const lp::Vec omega = pt.mu.cwiseQuotient(vec({1, 2, 3}));
    const auto v = lp::vector_field_coords(ht.alg, ht.H, pt, ht.sign);
    EXPECT_LE(lp::max_abs(v.qdot - cross(pt.q, omega)), 1e-14);
    EXPECT_LE(lp::max_abs(v.mudot - cross(pt.mu, omega) - 0.7 * cross(pt.q, vec({0, 0, 1}))), 1e-14);
  }
}

TEST(HeavyTop, SleepingTopIsEquilibrium) {
  const auto ht = lp::build_heavy_top();
  EXPECT_LE(lp::max_abs(field_at(ht, {vec({0, 0, 1}), vec({0, 0, 2.5})})), 1e-15);
}

TEST(HeavyTop, RejectsNonUnitChi) {
  EXPECT_THROW(lp::build_heavy_top({{1, 2, 3}, 1.0, {0, 0, 2}}), lp::InputError);
}

TEST(AtiyahAbelian, UniformFieldCurvature) {
  const auto alg = lp::build_atiyah_abelian(
      3, {lptest::parse("-q2/2*1.5", 3, 0), lptest::parse("q1/2*1.5", 3, 0), lp::Expr::constant(0.0)});
  const lp::Tensor3 c = lp::eval_structure(alg, vec({0.2, -0.3, 0.9}));
  EXPECT_NEAR(c(3, 0, 1), -1.5, 1e-15);
  EXPECT_NEAR(c(3, 1, 0), 1.5, 1e-15);
  lp::Tensor3 rest = c;
  rest(3, 0, 1) = rest(3, 1, 0) = 0.0;
  EXPECT_EQ(rest.max_abs(), 0.0);
  EXPECT_TRUE(lp::eval_anchor(alg, vec({0, 0, 0})).leftCols(3).isIdentity(0.0));
  EXPECT_EQ(lp::max_abs(lp::eval_anchor(alg, vec({0, 0, 0})).col(3)), 0.0);
}

TEST(AtiyahAbelian, ZeroPotentialIsFreeParticle) {
  const auto alg = lp::build_atiyah_abelian(3, std::vector<lp::Expr>(3, lp::Expr::constant(0.0)));
  EXPECT_EQ(lp::eval_structure(alg, vec({1, 2, 3})).max_abs(), 0.0);
  const auto H = lptest::field("(p1^2+p2^2+p3^2)/2", 3, 4);
  const auto v = lp::vector_field_coords(alg, H, {vec({1, 2, 3}), vec({0.5, -1, 2, 7})}, lp::Sign::Minus);
  EXPECT_EQ(v.qdot, vec({0.5, -1, 2}));
  EXPECT_EQ(lp::max_abs(v.mudot), 0.0);
}

TEST(AtiyahAbelian, RandomPotentialPassesStructureCheck) {
  lp::Rng rng(63);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<lp::Expr> a;
    for (int i = 0; i < 3; ++i) a.push_back(lp::random_base_polynomial(rng, 3, 3, 4));
    const auto alg = lp::build_atiyah_abelian(3, a);
    std::vector<lp::Vec> qs;
    for (int k = 0; k < 20; ++k) qs.push_back(rng.uniform_vec(3, -1, 1));
    EXPECT_TRUE(lp::check_structure_equations(alg, qs, 1e-5, 1e-7).pass);
  }
}

TEST(AtiyahNonabelian, So3BundlePassesStructureCheck) {
  lp::Tensor3 so3(3, 3, 3);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c) so3(a, b, c) = static_cast<double>((b - c) * (c - a) * (a - b)) / 2.0;
  lp::Rng rng(64);
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<lp::Expr> a;
    for (int k = 0; k < 9; ++k) a.push_back(lp::random_base_polynomial(rng, 3, 2, 3));
    const auto alg = lp::build_atiyah(3, so3, a);
    std::vector<lp::Vec> qs;
    for (int k = 0; k < 10; ++k) qs.push_back(rng.uniform_vec(3, -1, 1));
    const auto r = lp::check_structure_equations(alg, qs, 1e-5, 1e-7);
    EXPECT_TRUE(r.pass) << r.anchor_residual << " " << r.jacobi_residual;
  }
}

TEST(ChargedParticle, HandCodedLorentzForce) {
  const double mass = 1.7, B = 0.8;
  const auto cp = lp::build_charged_particle({mass, B, 1.0});
  lp::Rng rng(65);
  for (int k = 0; k < 50; ++k) {
    const auto pt = cp.random_state(rng);
    const lp::Vec xdot = pt.mu.head(3) / mass;
    const double qbar = pt.mu[3];
    // R_12 = B, R_21 = −B: ẏ_i = μ̄ R_ij ẋ^j.
    const lp::Vec ydot = vec({qbar * B * xdot[1], -qbar * B * xdot[0], 0.0});
    const auto v = lp::vector_field_coords(cp.alg, cp.H, pt, cp.sign);
    EXPECT_LE(lp::max_abs(v.qdot - xdot), 1e-10);
    EXPECT_LE(lp::max_abs(v.mudot.head(3) - ydot), 1e-10);
    EXPECT_EQ(v.mudot[3], 0.0);
  }
}

TEST(ChargedParticle, LarmorRadiusAndChargeConservation) {
  const auto cp = lp::build_charged_particle({1.0, 1.0, 1.0});
  const double T = 2.0 * std::numbers::pi;
  const auto tr = lp::integrate(cp.alg, cp.H, cp.starts[0], 0.0, T, 1e-4, lp::Method::RK4, cp.sign);
  // Centre from the initial state: x0 plus the radius along ẏ(0)/|ẏ(0)|, which points inward.
  const auto v0 = lp::vector_field_coords(cp.alg, cp.H, cp.starts[0], cp.sign);
  const lp::Vec centre = cp.starts[0].q + v0.mudot.head(3).normalized();
  double worst = 0.0;
  for (const auto& s : tr.states) worst = std::max(worst, std::abs((s.q - centre).norm() - 1.0));
  EXPECT_LE(worst, 1e-6);
  const auto d = lp::drift_report(tr, cp.named_observables());
  EXPECT_LE(lp::drift_of(d, "charge"), 1e-12);
}

TEST(Catalog, EverySystemPassesStructureCheck) {
  lp::Rng rng(66);
  for (const auto& s : all_systems()) {
    std::vector<lp::Vec> qs;
    for (int k = 0; k < 20; ++k) qs.push_back(s.random_q(rng));
    EXPECT_TRUE(lp::check_structure_equations(s.alg, qs, 1e-5, 1e-7).pass) << s.name;
  }
}

TEST(Catalog, InvariantsConservedFromEveryStart) {
  for (const auto& s : all_systems())
    for (const auto& start : s.starts) {
      const auto tr = lp::integrate(s.alg, s.H, start, 0.0, 10.0, 1e-3, lp::Method::RK4, s.sign);
      for (const auto& e : lp::drift_report(tr, s.named_observables())) EXPECT_LE(e.max_drift, 1e-7) << s.name << " " << e.name;
    }
}

TEST(Catalog, FormulationsAgree) {
  lp::Rng rng(67);
  for (const auto& s : all_systems()) {
    const auto r = lp::equivalence_suite(s, rng, {100, 5, 1e-9});
    EXPECT_TRUE(r.pass) << s.name << " " << r.max_diff << " " << r.gamma_spread;
  }
}

TEST(Catalog, ListsBuiltins) {
  std::vector<std::string> names;
  for (const auto& e : lp::list_systems()) names.push_back(e.name);
  EXPECT_EQ(names, (std::vector<std::string>{"pendulum", "rigid_body", "heavy_top", "charged_particle"}));
}
