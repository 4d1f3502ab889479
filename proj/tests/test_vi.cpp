#include "stackseek/scenarios/illustrative.hpp"
#include "stackseek/scenarios/testbed.hpp"
#include "stackseek/vi.hpp"

#include <gtest/gtest.h>

using namespace stackseek;

namespace {

VecD v2(double a, double b) {
  VecD v(2);
  v << a, b;
  return v;
}

VecD lead(double y) { return VecD::Constant(1, y); }

ParametricGame<double> affine_game(const VecD& c, double box, Monotonicity<double> cls) {
  auto region = FeasibleRegion<double>::box(VecD::Constant(2, -box), VecD::Constant(2, box));
  return ParametricGame<double>(BlockLayout({1, 1}), 1,
                                [c](const VecD& x, const VecD&) { return VecD(x - c); }, region,
                                cls);
}

}  // namespace

TEST(NaturalResidual, TestbedLinePoint) {
  const auto tb = scenarios::build_monotone_testbed();
  EXPECT_NEAR(natural_residual<double>(tb.game().at(lead(1)), tb.game().region(), v2(0.5, -0.5)),
              0.0, 1e-15);
}

TEST(NaturalResidual, IdentityOperator) {
  auto region = FeasibleRegion<double>::box(VecD::Constant(2, -10), VecD::Constant(2, 10));
  const auto F = [](const VecD& x) { return x; };
  EXPECT_EQ(natural_residual<double>(F, region, v2(0, 0)), 0.0);
  EXPECT_DOUBLE_EQ(natural_residual<double>(F, region, v2(1, 0)), 1.0);
}

TEST(SolveVi, StronglyMonotoneExplicitZero) {
  const auto g = affine_game(v2(1, 2), 100, Monotonicity<double>::strongly(1));
  ViSolveParams<double> p;
  p.tol = 1e-10;
  const auto r = solve_vi(g, lead(0), p);
  ASSERT_TRUE(r.converged);
  EXPECT_LE(r.residual, p.tol);
  EXPECT_LE((r.x - v2(1, 2)).norm(), 1e-9);
}

TEST(SolveVi, TestbedFromFarStartLandsOnSolutionLine) {
  const auto tb = scenarios::build_monotone_testbed();
  ViSolveParams<double> p;
  p.tol = 1e-9;
  p.warm_start = v2(5, 5);
  const auto r = solve_vi(tb.game(), lead(1), p);
  ASSERT_TRUE(r.converged);
  EXPECT_LE(r.residual, p.tol);
  EXPECT_NEAR(r.x(0) - r.x(1), 1.0, 1e-8);
}

TEST(SolveVi, BoxExcludesUnconstrainedZero) {
  const auto g = affine_game(v2(2, 0), 1, Monotonicity<double>::strongly(1));
  const auto r = solve_vi(g, lead(0));
  ASSERT_TRUE(r.converged);
  EXPECT_LE((r.x - v2(1, 0)).norm(), 1e-7);
  // VI condition on a grid of feasible points: F(x*)^T (z - x*) >= 0
  const VecD Fx = r.x - v2(2, 0);
  for (double a = -1; a <= 1; a += 0.05)
    for (double b = -1; b <= 1; b += 0.05) EXPECT_GE(Fx.dot(v2(a, b) - r.x), -1e-7);
}

TEST(SolveVi, ReportsConvergedOnlyWithinTolerance) {
  const auto tb = scenarios::build_monotone_testbed();
  ViSolveParams<double> p;
  p.tol = 1e-12;
  p.max_iterations = 3;
  p.warm_start = v2(50, 50);
  const auto r = solve_vi(tb.game(), lead(1), p);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 3);
  EXPECT_GT(r.residual, p.tol);
}

TEST(SolveVi, RejectsUnverifiedGame) {
  const auto il = scenarios::build_illustrative({});
  EXPECT_THROW(solve_vi(il.game(), lead(0.9)), std::invalid_argument);
}

TEST(SolveVi, ClassViolationOnNonMonotoneOperator) {
  // A rotation-plus-expansion field declared monotone: residuals grow.
  auto region = FeasibleRegion<double>::box(VecD::Constant(2, -1e300), VecD::Constant(2, 1e300));
  ParametricGame<double> g(BlockLayout({1, 1}), 1,
                           [](const VecD& x, const VecD&) { return VecD(v2(-x(0) - x(1), x(0) - x(1))); },
                           region, Monotonicity<double>::monotone());
  ViSolveParams<double> p;
  p.warm_start = v2(1, 1);
  EXPECT_THROW(solve_vi(g, lead(0), p), ClassViolation);
}

TEST(SolveVi, PolyhedralRegion) {
  // F(x) = x - (2, 2) over x1 + x2 <= 2: solution (1, 1).
  auto region = RegionBuilder<double>(VecD::Constant(2, -10), VecD::Constant(2, 10))
                    .add_inequality(v2(1, 1), 2)
                    .build();
  ParametricGame<double> g(BlockLayout({1, 1}), 1,
                           [](const VecD& x, const VecD&) { return VecD(x - v2(2, 2)); }, region,
                           Monotonicity<double>::monotone());
  const auto r = solve_vi(g, lead(0));
  ASSERT_TRUE(r.converged);
  EXPECT_LE((r.x - v2(1, 1)).norm(), 1e-6);
}

TEST(EstimateLipschitz, LinearOperator) {
  MatD A(2, 2);
  A << 3, 0, 0, 1;
  const auto F = [&A](const VecD& x) { return VecD(A * x); };
  EXPECT_NEAR(estimate_lipschitz<double>(F, v2(0.3, 0.1), 20, 1), 3.0, 1e-6);
}
