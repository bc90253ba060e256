#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"

using lptest::parse;
using lptest::vec;

namespace {

lp::Mat diag(std::initializer_list<double> d) { return lptest::vec(d).asDiagonal(); }

/// g = diag(1, 1 + q1², 1) on the tangent bundle of R³.
lp::BundleMetric warped_metric() {
  std::vector<lp::Expr> e(9, lp::Expr::constant(0.0));
  e[0] = lp::Expr::constant(1.0);
  e[4] = parse("1 + q1^2", 3, 0);
  e[8] = lp::Expr::constant(1.0);
  return lp::BundleMetric::from_expressions(3, 3, e);
}

/// Γ^2_{12} = q1/(1 + q1²), the one entry compatibility with warped_metric needs.
lp::TQConnection warped_compatible_connection() {
  std::vector<lp::Expr> e(27, lp::Expr::constant(0.0));
  e[(1 * 3 + 0) * 3 + 1] = parse("q1/(1 + q1^2)", 3, 0);
  return lp::TQConnection::from_expressions(3, 3, e);
}

/// A q-dependent SPD metric on the heavy-top fibers.
lp::BundleMetric heavy_top_warped_metric() {
  std::vector<lp::Expr> e(9, lp::Expr::constant(0.0));
  e[0] = parse("2 + q1^2", 3, 0);
  e[4] = parse("3 + sin(q2)", 3, 0);
  e[8] = parse("2 + q3^2*q1^2", 3, 0);
  e[1] = e[3] = parse("0.2*q3", 3, 0);
  e[5] = e[7] = parse("0.1*q1*q2", 3, 0);
  return lp::BundleMetric::from_expressions(3, 3, e);
}

struct MetricCase {
  lp::AlgebroidChart alg;
  lp::TQConnection conn;
  lp::BundleMetric gm;
  double box;
};

std::vector<MetricCase> compatible_cases() {
  return {{lptest::so3_chart(), lp::TQConnection::zero(0, 3), lp::BundleMetric::constant(0, lp::Mat::Identity(3, 3)), 1},
          {lptest::so3_chart(), lp::TQConnection::zero(0, 3), lp::BundleMetric::constant(0, diag({1, 2, 3})), 1},
          {lptest::heavy_top_chart(), lp::TQConnection::zero(3, 3), lp::BundleMetric::constant(3, diag({1, 2, 3})), 1},
          {lptest::heavy_top_chart(), lp::TQConnection::zero(3, 3),
           lp::BundleMetric::constant(3, lp::Mat::Identity(3, 3)), 1},
          {lptest::tangent_chart(3), warped_compatible_connection(), warped_metric(), 1}};
}

}  // namespace

TEST(MetricConvert, IdentityLeavesVectorsAlone) {
  const auto gm = lp::BundleMetric::constant(0, lp::Mat::Identity(3, 3));
  const lp::Vec x = vec({1.0, -2.0, 0.5});
  EXPECT_EQ(lp::metric_convert(gm, lp::Vec(0), x, lp::MetricDirection::Flat), x);
  EXPECT_EQ(lp::metric_convert(gm, lp::Vec(0), x, lp::MetricDirection::Sharp), x);
}

TEST(MetricConvert, DiagonalSharp) {
  const auto gm = lp::BundleMetric::constant(0, diag({1, 2, 3}));
  EXPECT_LE(lp::max_abs(lp::metric_convert(gm, lp::Vec(0), vec({1, 1, 1}), lp::MetricDirection::Sharp) -
                        vec({1.0, 0.5, 1.0 / 3.0})),
            1e-15);
}

TEST(MetricConvert, RejectsIndefiniteAndAsymmetric) {
  const auto bad = lp::BundleMetric::constant(0, diag({1, -2, 3}));
  EXPECT_THROW(lp::metric_convert(bad, lp::Vec(0), vec({1, 1, 1}), lp::MetricDirection::Sharp), lp::MetricError);
  lp::Mat g = lp::Mat::Identity(2, 2);
  g(0, 1) = 0.1;
  EXPECT_THROW(lp::BundleMetric::constant(0, g).g(lp::Vec(0)), lp::MetricError);
}

TEST(MetricConvert, ErrorNamesBasePoint) {
  std::vector<lp::Expr> e{parse("q1", 1, 0)};
  const auto gm = lp::BundleMetric::from_expressions(1, 1, e);
  try {
    gm.g(vec({-0.5}));
    FAIL();
  } catch (const lp::MetricError& err) {
    EXPECT_NE(std::string(err.what()).find("-0.5"), std::string::npos);
  }
}

TEST(KineticPotential, IdentityMetricHalfSquaredNorm) {
  const auto H = lp::kinetic_potential_hamiltonian(lp::BundleMetric::constant(0, lp::Mat::Identity(2, 2)),
                                                   lp::ScalarField::constant(0, 0, 0.0));
  EXPECT_DOUBLE_EQ(H(lp::Vec(0), vec({3, 4})), 12.5);
}

TEST(KineticPotential, DiagonalMetric) {
  const auto H = lp::kinetic_potential_hamiltonian(lp::BundleMetric::constant(0, diag({1, 2, 3})),
                                                   lp::ScalarField::constant(0, 0, 0.0));
  EXPECT_NEAR(H(lp::Vec(0), vec({1, 1, 1})), 11.0 / 12.0, 1e-15);
}

TEST(KineticPotential, VerticalDifferentialIsSharp) {
  const auto gm = heavy_top_warped_metric();
  const auto U = lp::ScalarField::from_expression(parse("q3 + q1*q2", 3, 0), 3, 0);
  const auto H = lp::kinetic_potential_hamiltonian(gm, U);
  lp::Rng rng(40);
  for (int k = 0; k < 20; ++k) {
    const lp::Vec q = rng.uniform_vec(3, -1, 1);
    const lp::Vec mu = rng.uniform_vec(3, -1, 1);
    EXPECT_LE(lp::max_abs(H.dfiber(q, mu) - lp::metric_convert(gm, q, mu, lp::MetricDirection::Sharp)), 1e-12);
    EXPECT_NEAR(H(q, mu), 0.5 * mu.dot(gm.sharp(q, mu)) + U(q, lp::Vec(0)), 1e-14);
  }
}

TEST(GradPotential, TangentBundleLinearPotential) {
  const auto U = lp::ScalarField::from_expression(parse("q1", 3, 0), 3, 0);
  EXPECT_EQ(lp::grad_potential(lptest::tangent_chart(3), lp::BundleMetric::constant(3, lp::Mat::Identity(3, 3)), U,
                               vec({0.2, 0.3, 0.4})),
            vec({1, 0, 0}));
}

TEST(GradPotential, LieAlgebraIsZero) {
  EXPECT_EQ(lp::max_abs(lp::grad_potential(lptest::so3_chart(), lp::BundleMetric::constant(0, diag({1, 2, 3})),
                                           lp::ScalarField::constant(0, 0, 1.0), lp::Vec(0))),
            0.0);
}

TEST(GradPotential, HeavyTopIsSharpOfAnchorTranspose) {
  const auto alg = lptest::heavy_top_chart();
  const auto U = lp::ScalarField::from_expression(parse("q3", 3, 0), 3, 0);
  const lp::Vec q = vec({1, 0, 0});
  const lp::Vec expected = lp::eval_anchor(alg, q).transpose() * vec({0, 0, 1});
  const lp::Vec got = lp::grad_potential(alg, lp::BundleMetric::constant(3, lp::Mat::Identity(3, 3)), U, q);
  EXPECT_LE(lp::max_abs(got - expected), 1e-15);
  EXPECT_LE(lp::max_abs(got - vec({0, 1, 0})), 1e-15);
  const lp::Vec scaled = lp::grad_potential(alg, lp::BundleMetric::constant(3, diag({1, 2, 4})), U, q);
  EXPECT_LE(lp::max_abs(scaled - vec({0, 0.5, 0})), 1e-15);
}

TEST(NablaDagger, So3IdentityIsStructureConstants) {
  const auto d = lp::nabla_dagger_coeffs(lptest::so3_chart(), lp::TQConnection::zero(0, 3),
                                         lp::BundleMetric::constant(0, lp::Mat::Identity(3, 3)), lp::Vec(0));
  EXPECT_LE((d - lp::eval_structure(lptest::so3_chart(), lp::Vec(0))).max_abs(), 1e-15);
}

TEST(NablaDagger, FlatTangentVanishes) {
  const auto d = lp::nabla_dagger_coeffs(lptest::tangent_chart(2), lp::TQConnection::zero(2, 2),
                                         lp::BundleMetric::constant(2, diag({2, 5})), vec({0.3, 0.1}));
  EXPECT_EQ(d.max_abs(), 0.0);
}

TEST(NablaDagger, DualityWithNablaBar) {
  // ρ(e_I)[g_JK] = g(∇̄†_{e_I} e_J, e_K) + g(e_J, ∇̄_{e_I} e_K), left side by central differences.
  const auto alg = lptest::heavy_top_chart();
  const auto gm = heavy_top_warped_metric();
  lp::Rng rng(41);
  for (int trial = 0; trial < 5; ++trial) {
    const auto conn = lp::random_connection(rng, 3, 3);
    const lp::Vec q = rng.uniform_vec(3, -1, 1);
    const lp::Mat g = gm.g(q);
    const lp::Mat rho = lp::eval_anchor(alg, q);
    const lp::Tensor3 c = lp::eval_structure(alg, q);
    const lp::Tensor3 gam = conn.christoffel(q);
    const lp::Tensor3 d = lp::nabla_dagger_coeffs(alg, conn, gm, q);
    const double h = 1e-5;
    for (int I = 0; I < 3; ++I) {
      const lp::Mat dg = (gm.g(q + h * rho.col(I)) - gm.g(q - h * rho.col(I))) / (2 * h);
      for (int J = 0; J < 3; ++J)
        for (int K = 0; K < 3; ++K) {
          double rhs = 0.0;
          for (int M = 0; M < 3; ++M) {
            double nb = c(M, I, K);  // (∇̄_{e_I} e_K)^M
            for (int i = 0; i < 3; ++i) nb += gam(M, i, I) * rho(i, K);
            rhs += d(M, I, J) * g(M, K) + g(J, M) * nb;
          }
          EXPECT_NEAR(dg(J, K), rhs, 1e-8);
        }
    }
  }
}

TEST(LeviCivita, So3BiInvariantHalving) {
  const auto lc = lp::levi_civita_coeffs(lptest::so3_chart(), lp::BundleMetric::constant(0, lp::Mat::Identity(3, 3)),
                                         lp::Vec(0));
  EXPECT_LE(lp::max_abs(lp::contract_structure(lc, lp::Vec::Unit(3, 0), lp::Vec::Unit(3, 1)) - vec({0, 0, 0.5})),
            1e-15);
}

TEST(LeviCivita, FlatTangentVanishes) {
  EXPECT_EQ(lp::levi_civita_coeffs(lptest::tangent_chart(2), lp::BundleMetric::constant(2, diag({2, 5})),
                                   vec({0.3, 0.1}))
                .max_abs(),
            0.0);
}

TEST(LeviCivita, MetricCompatibleAndTorsionFree) {
  // ρ_I[g_JK] = g(∇_I e_J, e_K) + g(e_J, ∇_I e_K) and ∇_I e_J − ∇_J e_I = [e_I, e_J].
  const auto alg = lptest::heavy_top_chart();
  const auto gm = heavy_top_warped_metric();
  lp::Rng rng(42);
  for (int trial = 0; trial < 5; ++trial) {
    const lp::Vec q = rng.uniform_vec(3, -1, 1);
    const lp::Mat g = gm.g(q);
    const lp::Mat rho = lp::eval_anchor(alg, q);
    const lp::Tensor3 c = lp::eval_structure(alg, q);
    const lp::Tensor3 lc = lp::levi_civita_coeffs(alg, gm, q);
    const double h = 1e-5;
    for (int I = 0; I < 3; ++I) {
      const lp::Mat dg = (gm.g(q + h * rho.col(I)) - gm.g(q - h * rho.col(I))) / (2 * h);
      for (int J = 0; J < 3; ++J) {
        for (int K = 0; K < 3; ++K) {
          double rhs = 0.0;
          for (int M = 0; M < 3; ++M) rhs += lc(M, I, J) * g(M, K) + g(J, M) * lc(M, I, K);
          EXPECT_NEAR(dg(J, K), rhs, 1e-8);
          EXPECT_NEAR(lc(K, I, J) - lc(K, J, I), c(K, I, J), 1e-12);
        }
      }
    }
  }
}

TEST(LeviCivita, HalfSymmetrizedDaggerPlusBracket) {
  lp::Rng rng(43);
  for (const auto& mc : compatible_cases()) {
    for (int k = 0; k < 10; ++k) {
      const lp::Vec q = rng.uniform_vec(mc.alg.base_dim(), -mc.box, mc.box);
      const lp::Tensor3 d = lp::nabla_dagger_coeffs(mc.alg, mc.conn, mc.gm, q);
      const lp::Tensor3 c = lp::eval_structure(mc.alg, q);
      const lp::Tensor3 lc = lp::levi_civita_coeffs(mc.alg, mc.gm, q);
      const int m = mc.alg.fiber_dim();
      for (int K = 0; K < m; ++K)
        for (int I = 0; I < m; ++I)
          for (int J = 0; J < m; ++J)
            EXPECT_NEAR(lc(K, I, J), 0.5 * (d(K, I, J) + d(K, J, I) + c(K, I, J)), 1e-8);
      const lp::Vec x = rng.uniform_vec(m, -1, 1);
      EXPECT_LE(lp::max_abs(lp::contract_structure(lc, x, x) - lp::contract_structure(d, x, x)), 1e-10);
    }
  }
}

TEST(Compatibility, ConstantMetricFlatConnection) {
  EXPECT_EQ(lp::metric_compatibility_residual(lptest::tangent_chart(2), lp::TQConnection::zero(2, 2),
                                              lp::BundleMetric::constant(2, diag({2, 5})), vec({0.3, 0.1})),
            0.0);
}

TEST(Compatibility, WarpedMetricWithFlatConnection) {
  EXPECT_NEAR(lp::metric_compatibility_residual(lptest::tangent_chart(3), lp::TQConnection::zero(3, 3),
                                                warped_metric(), vec({1, 0.2, -0.4})),
              2.0, 1e-12);
}

TEST(Compatibility, HandSolvedConnection) {
  lp::Rng rng(44);
  for (int k = 0; k < 10; ++k)
    EXPECT_LE(lp::metric_compatibility_residual(lptest::tangent_chart(3), warped_compatible_connection(),
                                                warped_metric(), rng.uniform_vec(3, -2, 2)),
              1e-10);
}

TEST(NewtonField, MatchesGenericFieldOnHeavyTop) {
  const auto ht = lp::build_heavy_top();
  const auto H = lp::kinetic_potential_hamiltonian(*ht.gm, *ht.U);
  lp::Rng rng(45);
  for (int k = 0; k < 50; ++k) {
    const auto pt = ht.random_state(rng);
    const auto nv = lp::newton_field(ht.alg, ht.conn, *ht.gm, *ht.U, pt);
    const auto gv = lp::vector_field_connection(ht.alg, ht.conn, H, pt, lp::Sign::Minus);
    EXPECT_LE(lp::max_abs(nv.qdot - gv.qdot), 1e-9);
    EXPECT_LE(lp::max_abs(nv.mudot - gv.mudot), 1e-9);
    EXPECT_NEAR(H(pt.q, pt.mu), ht.H(pt.q, pt.mu), 1e-14);
  }
}

TEST(NewtonField, WarpedTangentMatchesGenericField) {
  const auto alg = lptest::tangent_chart(3);
  const auto gm = warped_metric();
  const auto U = lp::ScalarField::from_expression(parse("cos(q2) + q1*q3", 3, 0), 3, 0);
  const auto H = lp::kinetic_potential_hamiltonian(gm, U);
  const auto conn = warped_compatible_connection();
  lp::Rng rng(46);
  for (int k = 0; k < 50; ++k) {
    const lp::PhasePoint pt{rng.uniform_vec(3, -1, 1), rng.uniform_vec(3, -1, 1)};
    const auto nv = lp::newton_field(alg, conn, gm, U, pt);
    const auto gv = lp::vector_field_coords(alg, H, pt, lp::Sign::Minus);
    EXPECT_LE(lp::max_abs(nv.qdot - gv.qdot), 1e-9);
    EXPECT_LE(lp::max_abs(nv.mudot - gv.mudot), 1e-9);
  }
}

TEST(NewtonField, AccelerationSolvesGeodesicForm) {
  // ȧ + ∇̄†(a,a) = −grad U, with the coefficient form of ∇̄†_a a, and the same with ∇^g.
  lp::Rng rng(47);
  for (const auto& mc : compatible_cases()) {
    const int n = mc.alg.base_dim();
    const int m = mc.alg.fiber_dim();
    const auto U = n == 0 ? lp::ScalarField::constant(0, 0, 0.0)
                          : lp::ScalarField::from_expression(parse("q1*q2 - q3", 3, 0), 3, 0);
    for (int k = 0; k < 10; ++k) {
      const lp::PhasePoint pt{rng.uniform_vec(n, -1, 1), rng.uniform_vec(m, -1, 1)};
      const auto nv = lp::newton_field(mc.alg, mc.conn, mc.gm, U, pt);
      const lp::Vec a = mc.gm.sharp(pt.q, pt.mu);
      const lp::Vec grad = lp::grad_potential(mc.alg, mc.gm, U, pt.q);
      const lp::Vec viaD = -grad - lp::contract_structure(lp::nabla_dagger_coeffs(mc.alg, mc.conn, mc.gm, pt.q), a, a);
      const lp::Vec viaLC = -grad - lp::contract_structure(lp::levi_civita_coeffs(mc.alg, mc.gm, pt.q), a, a);
      EXPECT_LE(lp::max_abs(nv.adot - viaD), 1e-9);
      EXPECT_LE(lp::max_abs(nv.adot - viaLC), 1e-9);
    }
  }
}

TEST(NewtonField, BiInvariantGeodesicsAreSteady) {
  lp::Rng rng(48);
  for (int k = 0; k < 10; ++k) {
    const auto nv = lp::newton_field(lptest::so3_chart(), lp::TQConnection::zero(0, 3),
                                     lp::BundleMetric::constant(0, lp::Mat::Identity(3, 3)),
                                     lp::ScalarField::constant(0, 0, 0.0), {lp::Vec(0), rng.uniform_vec(3, -1, 1)});
    EXPECT_LE(lp::max_abs(nv.mudot), 1e-15);
  }
}

TEST(NewtonField, RejectsIncompatibleConnectionAndPlusSign) {
  const auto alg = lptest::tangent_chart(3);
  const auto U = lp::ScalarField::constant(3, 0, 0.0);
  const lp::PhasePoint pt{vec({1, 0, 0}), vec({1, 1, 1})};
  try {
    lp::newton_field(alg, lp::TQConnection::zero(3, 3), warped_metric(), U, pt);
    FAIL();
  } catch (const lp::IncompatibilityError& e) {
    EXPECT_NEAR(e.residual(), 2.0, 1e-12);
  }
  EXPECT_THROW(lp::newton_field(alg, warped_compatible_connection(), warped_metric(), U, pt, lp::Sign::Plus),
               lp::InputError);
}
