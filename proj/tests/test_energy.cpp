#include "stackseek/audit.hpp"
#include "stackseek/scenarios/energy.hpp"

#include <gtest/gtest.h>

using namespace stackseek;
using namespace stackseek::scenarios;

namespace {

const EnergyCommunity& community() {
  static const EnergyCommunity ec = build_energy_community(default_energy_config());
  return ec;
}

VecD prices(double a, double b) {
  VecD y(2);
  y << a, b;
  return y;
}

}  // namespace

TEST(Energy, Layout) {
  const auto& ec = community();
  EXPECT_EQ(ec.game().players(), 3);
  EXPECT_EQ(ec.game().leader_dimension(), 2);
  // per node and hour: p_g, p_mg, p_st, two trades, theta
  EXPECT_EQ(ec.game().dimension(), 3 * 2 * 6);
  EXPECT_EQ(ec.index_trade(1, 0, 0), ec.index_gen(1, 0) + 3);
  EXPECT_THROW(ec.index_trade(0, 0, 0), std::invalid_argument);
}

TEST(Energy, SelectionVanishesAtReference) {
  const auto& ec = community();
  EXPECT_EQ(ec.phi()(ec.reference_point()), 0.0);
  EXPECT_EQ(ec.phi().mu, 2.0);
  EXPECT_TRUE(check_strong_convexity(ec.phi(), 2.0, ec.game().dimension(), 200, 1).passed);
}

TEST(Energy, RegionIsFeasibleAndRowsNamed) {
  const auto& r = community().game().region();
  EXPECT_LE(r.violation(r.feasible_point()), 1e-8);
  EXPECT_EQ(r.equality_rows(), 2 * (3 + 3 + 2));
  EXPECT_EQ(r.inequality_rows(), 2 * 2 * 2);
  EXPECT_EQ(r.equality_names().front(), "balance node 0[h0]");
}

TEST(Energy, InfeasibleDemandNamesRow) {
  auto cfg = default_energy_config();
  cfg.demand[2][1] = 50;
  try {
    build_energy_community(cfg);
    FAIL() << "expected InfeasibleRegion";
  } catch (const InfeasibleRegion& e) {
    EXPECT_FALSE(e.row().empty());
  }
}

TEST(Energy, ConfigValidation) {
  auto cfg = default_energy_config();
  cfg.lines.pop_back();  // node 2 disconnected
  EXPECT_THROW(build_energy_community(cfg), std::invalid_argument);
  cfg = default_energy_config();
  cfg.partners.push_back({1, 0});
  EXPECT_THROW(build_energy_community(cfg), std::invalid_argument);
  cfg = default_energy_config();
  cfg.tariff.pop_back();
  EXPECT_THROW(build_energy_community(cfg), std::invalid_argument);
}

TEST(Energy, PseudogradientMatchesCosts) {
  const auto& ec = community();
  Philox4x32 rng(4);
  std::vector<VecD> pts;
  for (int i = 0; i < 20; ++i) pts.push_back(sample_feasible(ec.game().region(), rng));
  EXPECT_LE(pseudogradient_fd_error(ec.game(), prices(0.4, 1.3), pts), 1e-6);
}

TEST(Energy, JacobianMatchesOperator) {
  const auto& ec = community();
  Philox4x32 rng(5);
  const VecD y = prices(0.7, -0.2);
  const VecD x = sample_feasible(ec.game().region(), rng);
  const MatD J = (*ec.game().jacobian())(x, y);
  const double h = 1e-6;
  for (int j = 0; j < x.size(); ++j) {
    VecD xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    const VecD col = (ec.game().pseudogradient()(xp, y) - ec.game().pseudogradient()(xm, y)) / (2 * h);
    EXPECT_LE((col - J.col(j)).norm(), 1e-7);
  }
  EXPECT_GE(Eigen::SelfAdjointEigenSolver<MatD>(0.5 * (J + J.transpose())).eigenvalues().minCoeff(),
            -1e-12);
}

TEST(Energy, MonotoneAtSampledPrices) {
  const auto& ec = community();
  Philox4x32 rng(6);
  for (int s = 0; s < 5; ++s) {
    const VecD y = prices(rng.uniform(-2, 2), rng.uniform(-2, 2));
    EXPECT_TRUE(check_monotonicity(ec.game(), y, 1000, 100 + s).passed);
  }
}

TEST(Energy, EquilibriaBalanceAndReciprocity) {
  const auto& ec = community();
  const auto& cfg = ec.config();
  ViSolveParams<double> p;
  p.tol = 1e-8;
  for (const VecD& y : {prices(0.3, 0.3), prices(1.5, -0.5)}) {
    const auto r = solve_vi(ec.game(), y, p);
    ASSERT_TRUE(r.converged);
    for (int h = 0; h < cfg.hours; ++h) {
      // summing the balance rows: supply equals demand
      EXPECT_NEAR(ec.supply_surplus(r.x, h), 0.0, 1e-7);
      for (auto [i, j] : cfg.partners)
        EXPECT_NEAR(r.x(ec.index_trade(i, j, h)) + r.x(ec.index_trade(j, i, h)), 0.0, 1e-7);
    }
    EXPECT_LE(ec.game().region().violation(r.x), 1e-7);
  }
}

TEST(Energy, EquilibriumSetIsNotSingleton) {
  // Renewable output is free, so splitting it between p_g and p_st is
  // payoff-neutral; two regularizers select two different equilibria.
  const auto& ec = community();
  const VecD y = prices(0.3, 0.3);
  ViSolveParams<double> p;
  p.tol = 1e-9;
  const auto a = solve_regularized(ec.game(), ec.phi(), 1e-4, y, p);
  const auto b = solve_regularized(
      ec.game(), half_squared_distance<double>(VecD::Zero(ec.game().dimension())), 1e-4, y, p);
  ASSERT_TRUE(a.converged && b.converged);
  EXPECT_GT((a.x - b.x).norm(), 1e-2);
  EXPECT_LE(natural_residual<double>(ec.game().at(y), ec.game().region(), a.x, 1e-12), 1e-3);
  EXPECT_LE(natural_residual<double>(ec.game().at(y), ec.game().region(), b.x, 1e-12), 1e-3);
}

TEST(Energy, LeaderObjectiveStructure) {
  const auto& ec = community();
  const VecD x = ec.game().region().feasible_point();
  const VecD y = prices(0.9, 0.1);
  double sum = 0;
  for (int i = 0; i < 3; ++i) sum += ec.agent_cost(i, x, y);
  const VecD d = y - prices(0.3, 0.3);
  EXPECT_NEAR(ec.leader()(y, x), sum + ec.config().penalty * d.squaredNorm(), 1e-12);
}
