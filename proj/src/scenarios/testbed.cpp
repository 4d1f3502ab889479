#include "stackseek/scenarios/testbed.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace stackseek::scenarios {

namespace {

ParametricGame<double> make_game(const TestbedConfig& cfg) {
  const int n = 2 * cfg.pairs;
  auto region = FeasibleRegion<double>::box(VecD::Constant(n, -cfg.box),
                                            VecD::Constant(n, cfg.box));
  const double s = cfg.shift;
  PseudogradientOracle<double> F = [s, pairs = cfg.pairs](const VecD& x, const VecD& y) {
    VecD out(x.size());
    for (int p = 0; p < pairs; ++p) {
      const double a = x(2 * p), b = x(2 * p + 1);
      out(2 * p) = a - b + s * a - y(0);
      out(2 * p + 1) = b - a + s * b + y(0);
    }
    return out;
  };
  std::vector<int> sizes(static_cast<std::size_t>(n), 1);
  ParametricGame<double> game(BlockLayout(sizes), 1, F, region,
                              s > 0 ? Monotonicity<double>::strongly(s)
                                    : Monotonicity<double>::monotone());
  game.with_jacobian([s, n](const VecD&, const VecD&) {
    MatD J = MatD::Identity(n, n) * (1.0 + s);
    for (int p = 0; p < n / 2; ++p) J(2 * p, 2 * p + 1) = J(2 * p + 1, 2 * p) = -1.0;
    return J;
  });
  // Player 2p owns x(2p) with cost 1/2 (1+s) a^2 - a b - y a, player 2p+1
  // owns x(2p+1) with 1/2 (1+s) b^2 - a b + y b.
  std::vector<CostOracle<double>> costs;
  for (int i = 0; i < n; ++i) {
    costs.push_back([i, s](const VecD& x, const VecD& y) {
      const int p = i / 2;
      const double a = x(2 * p), b = x(2 * p + 1);
      return i % 2 == 0 ? 0.5 * (1 + s) * a * a - a * b - y(0) * a
                        : 0.5 * (1 + s) * b * b - a * b + y(0) * b;
    });
  }
  game.with_costs(std::move(costs));
  return game;
}

}  // namespace

Testbed::Testbed(TestbedConfig cfg)
    : cfg_(cfg),
      problem_{make_game(cfg), half_squared_distance<double>(VecD::Zero(2 * cfg.pairs)),
               LeaderObjective<double>{[](const VecD& y, const VecD& x) {
                                         return (y(0) - 1) * (y(0) - 1) + x.squaredNorm();
                                       },
                                       {}},
               VecD::Constant(1, cfg.y0)} {
  if (cfg.pairs < 1) throw std::invalid_argument("testbed: pairs must be >= 1");
  if (!(cfg.box > 0)) throw std::invalid_argument("testbed: box must be positive");
  if (cfg.shift < 0) throw std::invalid_argument("testbed: shift must be >= 0");
  const double p = cfg.pairs, c = 2 + cfg.shift;
  auto& meta = problem_.J0.meta;
  // J0(y, x*(y)) = (y - 1)^2 + 2 p y^2 / c^2
  meta.induced_smoothness = 2 + 4 * p / (c * c);
  meta.lipschitz_x = 2 * cfg.box * std::sqrt(2 * p);
  meta.lower_bound = induced_objective(induced_minimizer());
}

Testbed build_monotone_testbed(const TestbedConfig& cfg) { return Testbed(cfg); }

VecD Testbed::regularized_solution(double y, double beta) const {
  VecD x(2 * cfg_.pairs);
  const double v = y / (2 + cfg_.shift + beta);
  for (int p = 0; p < cfg_.pairs; ++p) {
    x(2 * p) = v;
    x(2 * p + 1) = -v;
  }
  return x;
}

VecD Testbed::selection(double y) const { return regularized_solution(y, 0.0); }

VecD Testbed::equilibrium(double y, double t) const {
  return selection(y) + VecD::Constant(2 * cfg_.pairs, t);
}

double Testbed::induced_objective(double y) const {
  return leader()(VecD::Constant(1, y), selection(y));
}

double Testbed::induced_gradient(double y) const {
  const double c = 2 + cfg_.shift;
  return 2 * (y - 1) + 4 * cfg_.pairs * y / (c * c);
}

double Testbed::induced_minimizer() const {
  const double c = 2 + cfg_.shift;
  return 2 / (2 + 4 * cfg_.pairs / (c * c));
}

}  // namespace stackseek::scenarios
