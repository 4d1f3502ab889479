#include "stackseek/scenarios/illustrative.hpp"
#include "stackseek/philox.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace stackseek;
using namespace stackseek::scenarios;

namespace {

VecD v2(double a, double b) {
  VecD v(2);
  v << a, b;
  return v;
}

Illustrative make(double eps, InducedMap map = InducedMap::kDerived) {
  IllustrativeConfig c;
  c.epsilon = eps;
  c.induced_map = map;
  return build_illustrative(c);
}

// Minimizer of (x1 - 1)^2 + 100 (y + eps)^2 x1^2 by golden-section search.
double golden_x1(double y, double eps) {
  const auto f = [&](double t) {
    return (t - 1) * (t - 1) + 100 * (y + eps) * (y + eps) * t * t;
  };
  double a = -1, b = 2;
  const double r = (std::sqrt(5.0) - 1) / 2;
  for (int i = 0; i < 200; ++i) {
    const double c = b - r * (b - a), d = a + r * (b - a);
    if (f(c) < f(d)) b = d;
    else a = c;
  }
  return 0.5 * (a + b);
}

}  // namespace

TEST(Illustrative, InteriorEquilibriumMembership) {
  const auto il = make(0.1);
  EXPECT_TRUE(il.in_interior_equilibria(0.9, v2(0.3, -0.3)));
  EXPECT_FALSE(il.in_interior_equilibria(0.9, v2(0.3, 0.3)));
  EXPECT_FALSE(il.in_interior_equilibria(0.9, v2(10, -10)));  // on the boundary
  // every interior-equilibrium point zeroes the pseudogradient
  for (double t : {-2.0, 0.0, 0.7}) {
    const VecD x = il.interior_equilibrium(1.7, t);
    EXPECT_NEAR(il.game().pseudogradient()(x, VecD::Constant(1, 1.7)).norm(), 0.0, 1e-14);
  }
}

TEST(Illustrative, SelectionAtMonotonePoint) {
  const auto il = make(0.1);
  const VecD x = il.selection(0.9);
  EXPECT_NEAR(x(0), 1.0 / 101, 1e-15);
  EXPECT_NEAR(x(1), -1.0 / 101, 1e-15);
}

TEST(Illustrative, SelectionMatchesOneDimensionalSearch) {
  const auto il = make(0.1);
  for (double y : {-0.05, 0.0, 0.4, 2.5}) EXPECT_NEAR(il.selected_x1(y), golden_x1(y, 0.1), 1e-7);
}

TEST(Illustrative, PublishedMapOption) {
  const auto il = make(0.2, InducedMap::kPublished);
  EXPECT_DOUBLE_EQ(il.selected_x1(0.1), 0.5);
  EXPECT_TRUE(il.in_interior_equilibria(0.1, il.selection(0.1)));
}

TEST(Illustrative, LeaderValue) {
  EXPECT_DOUBLE_EQ(make(0.1).leader()(VecD::Constant(1, 0.9), v2(0.3, -0.3)), 0.81);
}

TEST(Illustrative, DomainFault) {
  const auto il = make(0.1);
  EXPECT_THROW(il.coupling(-0.1), DomainFault);
  EXPECT_THROW(il.selection(-0.2), DomainFault);
}

TEST(Illustrative, ExogenousGradientIsChainRuleWithFrozenX1) {
  Philox4x32 rng(12);
  for (double eps : {0.1, 1.2}) {
    const auto il = make(eps);
    for (int i = 0; i < 200; ++i) {
      const double y = rng.uniform(-eps + 0.01, 3), x1 = rng.uniform(-2, 2);
      // d/dy J0(y, (x1, -(y+eps) x1)) with dx/dy = (0, -x1)
      const double x2 = -(y + eps) * x1;
      const double chain = (2 * y + x1 + x2) + y * (0 - x1);
      EXPECT_NEAR(il.exogenous_gradient(y, x1), chain, 1e-12);
    }
  }
}

TEST(Illustrative, ExactGradientMatchesInducedObjective) {
  const auto il = make(1.2);
  for (double y : {-0.5, 0.0, 0.8, 2.0}) {
    const double h = 1e-5;
    const double fd = (il.induced_objective(y + h) - il.induced_objective(y - h)) / (2 * h);
    EXPECT_NEAR(il.exact_gradient(y), fd, 1e-7);
  }
}

TEST(Regime, InexactWithConstantSequenceReachesFixedPoint) {
  const auto il = make(0.1);
  // Limits stay in the domain only for xbar < 0.2 / 1.1; xbar > 1 is unstable.
  for (double xbar : {0.05, 0.1, 0.15}) {
    const auto tr = run_regime(il, Regime::exogenous([xbar](long, double) { return xbar; }),
                               0.1, 2000, 1.0);
    ASSERT_FALSE(tr.fault) << *tr.fault;
    const double limit = -xbar * (1 - 0.1) / (2 * (1 - xbar));
    EXPECT_NEAR(tr.y_final, limit, 1e-8) << xbar;
    const auto rep = check_prop1(tr);
    EXPECT_TRUE(rep.y_converged);
    EXPECT_TRUE(rep.x1_converged);
    EXPECT_TRUE(rep.consistent);
  }
}

TEST(Regime, OscillatingCycles) {
  const auto il = make(1.2);
  const auto tr = run_regime(il, Regime::oscillating({0.5, 1.5}), 0.1, 500, 1.0);
  ASSERT_FALSE(tr.fault) << *tr.fault;
  double lo = 1e300, hi = -1e300;
  for (std::size_t k = 400; k < 500; ++k) {
    lo = std::min(lo, tr.records[k].y);
    hi = std::max(hi, tr.records[k].y);
  }
  EXPECT_GT(hi - lo, 0.05);
  const auto rep = check_prop1(tr);
  EXPECT_FALSE(rep.y_converged);
  EXPECT_FALSE(rep.x1_converged);
  EXPECT_TRUE(rep.consistent);
}

TEST(Regime, OscillationAmplitudeKeepsLeaderMoving) {
  const auto il = make(1.2);
  for (double amp : {0.1, 0.3, 0.6}) {
    const auto tr = run_regime(il, Regime::oscillating({0.5 - amp / 2, 0.5 + amp / 2}), 0.1, 800, 1.0);
    ASSERT_FALSE(tr.fault);
    const auto rep = check_prop1(tr);
    EXPECT_GT(rep.y_range, 1e-3) << amp;
    EXPECT_FALSE(rep.y_converged);
  }
}

TEST(Regime, ExactConvergesToGridOracle) {
  const auto il = make(1.2);
  const auto [ystar, jstar] =
      grid_argmin([&](double y) { return il.induced_objective(y); }, -1.2 + 1e-4, 5, 1e-4);
  const auto tr = run_regime(il, Regime::exact(), 0.05, 5000, 1.0);
  ASSERT_FALSE(tr.fault);
  EXPECT_LE(std::abs(tr.y_final - ystar), 1e-2);
  const auto rep = check_prop1(tr);
  EXPECT_TRUE(rep.y_converged && rep.x1_converged && rep.consistent);
  (void)jstar;
}

TEST(Regime, SmallEpsilonDriftsToDomainBoundary) {
  // At eps = 0.1 the induced objective decreases toward y = -eps, so exact
  // descent eventually leaves the domain.
  const auto il = make(0.1);
  const auto tr = run_regime(il, Regime::exact(), 0.05, 5000, 1.0);
  ASSERT_TRUE(tr.fault.has_value());
  EXPECT_FALSE(tr.records.empty());
}

TEST(Regime, OscillatingOutsideInteriorSetFaults) {
  const auto il = make(1.2);
  const auto tr = run_regime(il, Regime::oscillating({50.0}), 0.1, 10, 1.0);
  ASSERT_TRUE(tr.fault.has_value());
  EXPECT_TRUE(tr.records.empty());
}

TEST(Prop1, RequiresLongTrace) {
  RegimeTrace tr;
  tr.records.resize(199);
  EXPECT_THROW(check_prop1(tr), std::invalid_argument);
}

TEST(Prop1, InconsistentWhenOnlyLeaderSettles) {
  RegimeTrace tr;
  for (long k = 0; k < 400; ++k) tr.records.push_back({k, 0.3, k % 2 ? 0.5 : 1.5, 0, 0, 0});
  const auto rep = check_prop1(tr);
  EXPECT_TRUE(rep.y_converged);
  EXPECT_FALSE(rep.x1_converged);
  EXPECT_FALSE(rep.consistent);
}

TEST(GridArgmin, Parabola) {
  const auto [y, v] = grid_argmin([](double t) { return (t - 0.3) * (t - 0.3); }, -1, 1, 1e-3);
  EXPECT_NEAR(y, 0.3, 1e-3);
  EXPECT_NEAR(v, 0.0, 1e-6);
}
