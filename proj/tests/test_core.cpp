#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"

using lptest::vec;

namespace {

lp::SymbolicChart heavy_top_symbols() { return *lptest::heavy_top_chart().symbolic(); }

lp::Vec cross(const lp::Vec& a, const lp::Vec& b) {
  return vec({a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]});
}

std::vector<lp::Vec> random_points(lp::Rng& rng, int n, int count) {
  std::vector<lp::Vec> qs;
  for (int k = 0; k < count; ++k) qs.push_back(rng.uniform_vec(n, -1.0, 1.0));
  return qs;
}

}  // namespace

TEST(Anchor, TangentBundleIsIdentity) {
  const auto alg = lptest::tangent_chart(3);
  EXPECT_TRUE(lp::eval_anchor(alg, vec({0.3, -2.0, 5.0})).isIdentity(0.0));
}

TEST(Anchor, LieAlgebraOverPointIsEmpty) {
  const lp::Mat rho = lp::eval_anchor(lptest::so3_chart(), lp::Vec(0));
  EXPECT_EQ(rho.rows(), 0);
  EXPECT_EQ(rho.cols(), 3);
}

TEST(Anchor, HeavyTopColumnsAreCrossProducts) {
  const auto alg = lptest::heavy_top_chart();
  const lp::Mat rho = lp::eval_anchor(alg, vec({0.0, 0.0, 1.0}));
  EXPECT_TRUE(rho.col(0).isApprox(vec({0.0, 1.0, 0.0})));
  lp::Rng rng(3);
  for (int k = 0; k < 10; ++k) {
    const lp::Vec q = rng.uniform_vec(3, -1.0, 1.0);
    const lp::Mat r = lp::eval_anchor(alg, q);
    for (int I = 0; I < 3; ++I) EXPECT_LE(lp::max_abs(r.col(I) - cross(q, lp::Vec::Unit(3, I))), 1e-15);
  }
}

TEST(Anchor, DimensionMismatchThrows) {
  EXPECT_THROW(lp::eval_anchor(lptest::heavy_top_chart(), vec({1.0, 2.0})), lp::InputError);
}

TEST(Structure, TangentBundleVanishes) {
  EXPECT_EQ(lp::eval_structure(lptest::tangent_chart(2), vec({1.0, 2.0})).max_abs(), 0.0);
}

TEST(Structure, So3Constants) {
  const lp::Tensor3 c = lp::eval_structure(lptest::so3_chart(), lp::Vec(0));
  EXPECT_EQ(c(2, 0, 1), 1.0);
  EXPECT_EQ(c(2, 1, 0), -1.0);
  EXPECT_EQ(c(0, 1, 2), 1.0);
  EXPECT_EQ(c(1, 2, 0), 1.0);
  EXPECT_EQ(c(1, 0, 2), -1.0);
}

TEST(Structure, SymmetricMutationRaisesStructureError) {
  lp::SymbolicChart s = *lptest::so3_chart().symbolic();
  s.structure[(2 * 3 + 1) * 3 + 0] = lp::Expr::constant(1.0);  // C^3_21 = C^3_12 = 1
  const auto alg = lp::AlgebroidChart::from_expressions(s);
  EXPECT_THROW(lp::eval_structure(alg, lp::Vec(0)), lp::StructureError);
}

TEST(SectionBracket, So3BasisBracket) {
  const auto alg = lptest::so3_chart();
  const auto e1 = lp::SectionField::constant(0, lp::Vec::Unit(3, 0));
  const auto e2 = lp::SectionField::constant(0, lp::Vec::Unit(3, 1));
  EXPECT_TRUE(lp::section_bracket(alg, e1, e2, lp::Vec(0)).isApprox(vec({0.0, 0.0, 1.0})));
}

TEST(SectionBracket, CoordinateFieldsCommute) {
  const auto alg = lptest::tangent_chart(2);
  const auto d1 = lp::SectionField::constant(2, lp::Vec::Unit(2, 0));
  const auto d2 = lp::SectionField::constant(2, lp::Vec::Unit(2, 1));
  EXPECT_EQ(lp::max_abs(lp::section_bracket(alg, d1, d2, vec({0.4, -0.7}))), 0.0);
}

TEST(SectionBracket, LinearFieldAgainstCoordinateField) {
  const auto alg = lptest::tangent_chart(1);
  const auto xi = lp::SectionField::from_expressions(1, {lptest::parse("q1", 1, 0)});
  const auto eta = lp::SectionField::constant(1, vec({1.0}));
  for (double q : {-2.0, 0.0, 0.5, 3.0}) EXPECT_DOUBLE_EQ(lp::section_bracket(alg, xi, eta, vec({q}))[0], -1.0);
}

TEST(SectionBracket, FiniteDifferenceSectionsMatchSymbolic) {
  const auto alg = lptest::heavy_top_chart();
  const auto xs = lp::SectionField::from_expressions(
      3, {lptest::parse("q1*q2", 3, 0), lptest::parse("sin(q3)", 3, 0), lptest::parse("1+q1^2", 3, 0)});
  const auto xf = lp::SectionField::from_function(3, 3, [xs](const lp::Vec& q) { return xs(q); });
  const auto y = lp::SectionField::from_expressions(
      3, {lptest::parse("q3", 3, 0), lptest::parse("2", 3, 0), lptest::parse("q1-q2", 3, 0)});
  const lp::Vec q = vec({0.3, -0.6, 0.8});
  EXPECT_LE(lp::max_abs(lp::section_bracket(alg, xs, y, q) - lp::section_bracket(alg, xf, y, q)), 1e-8);
}

TEST(StructureEquations, So3PassesWithZeroResiduals) {
  const auto r = lp::check_structure_equations(lptest::so3_chart(), {lp::Vec(0), lp::Vec(0)}, 1e-5, 1e-7);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.anchor_residual, 0.0);
  EXPECT_LE(r.jacobi_residual, 1e-15);
}

TEST(StructureEquations, HeavyTopPassesAtRandomPoints) {
  lp::Rng rng(5);
  const auto r = lp::check_structure_equations(lptest::heavy_top_chart(), random_points(rng, 3, 20), 1e-5, 1e-7);
  EXPECT_TRUE(r.pass);
  EXPECT_LE(std::max(r.anchor_residual, r.jacobi_residual), 1e-7);
  EXPECT_EQ(r.samples, 20u);
}

TEST(StructureEquations, FiniteDifferenceModeHeavyTopPasses) {
  const auto sym = lptest::heavy_top_chart();
  const auto alg = lp::AlgebroidChart::from_functions(
      3, 3, [sym](const lp::Vec& q) { return lp::eval_anchor(sym, q); },
      [sym](const lp::Vec& q) { return lp::eval_structure(sym, q); });
  ASSERT_EQ(alg.derivative_mode(), lp::DerivativeMode::FiniteDifference);
  lp::Rng rng(6);
  EXPECT_TRUE(lp::check_structure_equations(alg, random_points(rng, 3, 20), 1e-5, 1e-7).pass);
}

TEST(StructureEquations, DoubledHeavyTopAnchorFails) {
  lp::SymbolicChart s = heavy_top_symbols();
  for (auto& e : s.anchor) e = 2.0 * e;
  lp::Rng rng(5);
  const auto r = lp::check_structure_equations(lp::AlgebroidChart::from_expressions(s), random_points(rng, 3, 20),
                                               1e-5, 1e-7);
  EXPECT_FALSE(r.pass);
  EXPECT_GE(r.anchor_residual, 1e-2);
}

TEST(StructureEquations, SingleSignFlipInSo3Fails) {
  lp::SymbolicChart s = *lptest::so3_chart().symbolic();
  s.structure[(2 * 3 + 0) * 3 + 1] = lp::Expr::constant(-1.0);  // C^3_12 only
  const auto r = lp::check_structure_equations(lp::AlgebroidChart::from_expressions(s), {lp::Vec(0)}, 1e-5, 1e-7);
  EXPECT_FALSE(r.pass);
  EXPECT_GE(std::max({r.antisymmetry_residual, r.jacobi_residual}), 1e-2);
}

TEST(APathResidual, LieAlgebraIsTrivial) {
  const auto tr = lptest::sampled(
      0.0, 1.0, 0.1, [](double) { return lp::Vec(0); }, [](double t) { return vec({t, 1.0, 0.0}); },
      [](double t) { return vec({std::sin(t), 0.0, 2.0}); });
  EXPECT_EQ(lp::a_path_residual(lptest::so3_chart(), tr), 0.0);
}

TEST(APathResidual, ExactPathOnTangentBundle) {
  const auto tr = lptest::sampled(
      0.0, 1.0, 1e-3, [](double t) { return vec({t}); }, [](double) { return vec({0.0}); },
      [](double) { return vec({1.0}); });
  EXPECT_LE(lp::a_path_residual(lptest::tangent_chart(1), tr), 1e-8);
}

TEST(APathResidual, WrongSpeedGivesUnitResidual) {
  const auto tr = lptest::sampled(
      0.0, 1.0, 1e-3, [](double t) { return vec({t}); }, [](double) { return vec({0.0}); },
      [](double) { return vec({2.0}); });
  EXPECT_NEAR(lp::a_path_residual(lptest::tangent_chart(1), tr), 1.0, 1e-8);
}

TEST(APathResidual, TooFewSamplesThrows) {
  const auto tr = lptest::sampled(
      0.0, 0.1, 0.1, [](double t) { return vec({t}); }, [](double) { return vec({0.0}); },
      [](double) { return vec({1.0}); });
  EXPECT_THROW(lp::a_path_residual(lptest::tangent_chart(1), tr), lp::InputError);
}

TEST(LinearObservable, BasisPairing) {
  const auto e1 = lp::SectionField::constant(0, lp::Vec::Unit(3, 0));
  EXPECT_DOUBLE_EQ(lp::linear_observable(e1, {lp::Vec(0), vec({3.0, 0.0, 0.0})}), 3.0);
}

TEST(LinearObservable, ZeroSection) {
  const auto z = lp::SectionField::constant(3, lp::Vec::Zero(3));
  EXPECT_EQ(lp::linear_observable(z, {vec({1.0, 2.0, 3.0}), vec({4.0, 5.0, 6.0})}), 0.0);
}

TEST(LinearObservable, HeavyTopLinearSection) {
  const auto x = lp::SectionField::from_expressions(
      3, {lptest::parse("q1", 3, 0), lp::Expr::constant(0.0), lp::Expr::constant(0.0)});
  EXPECT_DOUBLE_EQ(lp::linear_observable(x, {vec({2.0, 0.0, 0.0}), vec({1.0, 1.0, 1.0})}), 2.0);
}
