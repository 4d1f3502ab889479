#include "stackseek/audit.hpp"
#include "stackseek/scenarios/testbed.hpp"
#include "stackseek/tikhonov.hpp"

#include <gtest/gtest.h>

using namespace stackseek;
using namespace stackseek::scenarios;

namespace {

VecD lead(double y) { return VecD::Constant(1, y); }

}  // namespace

TEST(Testbed, RegularizedSolutionIsLinearSolve) {
  const auto tb = build_monotone_testbed();
  MatD A(2, 2);
  A << 1.1, -1, -1, 1.1;
  VecD b(2);
  b << 1, -1;
  EXPECT_TRUE(tb.regularized_solution(1, 0.1).isApprox(A.partialPivLu().solve(b), 1e-14));
  EXPECT_NEAR(tb.regularized_solution(1, 0.1)(0), 0.476190476190, 1e-12);
}

TEST(Testbed, SelectionIsMinimumNormSolution) {
  const auto tb = build_monotone_testbed();
  // Lagrange: min ||x||^2 s.t. x1 - x2 = y gives x = (y/2, -y/2)
  const VecD x = tb.selection(1);
  EXPECT_DOUBLE_EQ(x(0), 0.5);
  EXPECT_DOUBLE_EQ(x(1), -0.5);
  for (double t : {-1.0, 0.5}) EXPECT_LT(x.norm(), tb.equilibrium(1, t).norm());
}

TEST(Testbed, EquilibriaSolveTheVi) {
  const auto tb = build_monotone_testbed();
  for (double t : {-3.0, 0.0, 2.0})
    EXPECT_NEAR(natural_residual<double>(tb.game().at(lead(1.5)), tb.game().region(),
                                         tb.equilibrium(1.5, t)),
                0.0, 1e-14);
}

TEST(Testbed, InducedObjective) {
  const auto tb = build_monotone_testbed();
  EXPECT_NEAR(tb.induced_minimizer(), 2.0 / 3, 1e-15);
  EXPECT_NEAR(tb.induced_gradient(2.0 / 3), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(*tb.leader().meta.induced_smoothness, 3.0);
  const double h = 1e-5;
  for (double y : {-1.0, 0.2, 3.0})
    EXPECT_NEAR(tb.induced_gradient(y),
                (tb.induced_objective(y + h) - tb.induced_objective(y - h)) / (2 * h), 1e-8);
}

TEST(Testbed, MultiplePairs) {
  TestbedConfig c;
  c.pairs = 3;
  const auto tb = build_monotone_testbed(c);
  EXPECT_EQ(tb.game().dimension(), 6);
  EXPECT_EQ(tb.game().players(), 6);
  const auto r = optimal_selection(tb.game(), tb.phi(), lead(1.0));
  ASSERT_TRUE(r.converged);
  EXPECT_LE((r.x - tb.selection(1.0)).norm(), 1e-5);
  EXPECT_TRUE(check_monotonicity(tb.game(), lead(0.3), 500, 1).passed);
}

TEST(Testbed, StronglyMonotoneVariantIsSingleton) {
  TestbedConfig c;
  c.shift = 0.5;
  const auto tb = build_monotone_testbed(c);
  EXPECT_EQ(tb.game().monotonicity().kind, MonotonicityClass::kStronglyMonotone);
  ViSolveParams<double> p;
  p.tol = 1e-10;
  const auto r = solve_vi(tb.game(), lead(1), p);
  EXPECT_LE((r.x - tb.selection(1)).norm(), 1e-9);
}

TEST(Testbed, InvalidConfig) {
  TestbedConfig c;
  c.pairs = 0;
  EXPECT_THROW(build_monotone_testbed(c), std::invalid_argument);
}
