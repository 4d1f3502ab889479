#ifndef STACKSEEK_SCENARIOS_TESTBED_HPP
#define STACKSEEK_SCENARIOS_TESTBED_HPP

// Linear monotone game with a continuum of equilibria and closed-form
// regularized and selected solutions. Each pair of followers plays
//   F = A x - (y, -y),  A = [[1, -1], [-1, 1]] (+ shift I),
// with phi = 1/2 ||x||^2 and J0 = (y - 1)^2 + ||x||^2.

#include "stackseek/zo.hpp"

namespace stackseek::scenarios {

struct TestbedConfig {
  int pairs = 1;
  double box = 100;    // every coordinate in [-box, box]
  double shift = 0;    // A + shift I; positive makes the game strongly monotone
  double y0 = 3.0;
};

class Testbed {
 public:
  explicit Testbed(TestbedConfig cfg);

  const TestbedConfig& config() const { return cfg_; }
  const SeekProblem<double>& problem() const { return problem_; }
  const ParametricGame<double>& game() const { return problem_.game; }
  const SelectionFunction<double>& phi() const { return problem_.phi; }
  const LeaderObjective<double>& leader() const { return problem_.J0; }

  /// Solution of the game regularized by beta grad phi: y / (2 + shift + beta) (1, -1).
  VecD regularized_solution(double y, double beta) const;
  /// Minimum-norm equilibrium (y / (2 + shift)) (1, -1) per pair.
  VecD selection(double y) const;
  /// The equilibrium x*_phi(y) + t (1, 1) per pair (only an equilibrium when shift = 0).
  VecD equilibrium(double y, double t) const;

  double induced_objective(double y) const;
  double induced_gradient(double y) const;
  /// Stationary point of the induced objective.
  double induced_minimizer() const;

 private:
  TestbedConfig cfg_;
  SeekProblem<double> problem_;
};

Testbed build_monotone_testbed(const TestbedConfig& cfg = {});

}  // namespace stackseek::scenarios

#endif  // STACKSEEK_SCENARIOS_TESTBED_HPP
