#ifndef STACKSEEK_SCENARIOS_ILLUSTRATIVE_HPP
#define STACKSEEK_SCENARIOS_ILLUSTRATIVE_HPP

// One leader, two scalar followers:
//   J1 = 1/2 (y + eps) x1^2 + x1 x2,   J2 = 1/2 x2^2 + (y + eps) x1 x2,
//   J0 = y^2 + y (x1 + x2).
// Interior equilibria form the line x2 = -(y + eps) x1, so the follower
// reaction is set-valued unless a selection is imposed.

#include "stackseek/zo.hpp"

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace stackseek::scenarios {

/// Closed form used for the selected first-follower strategy.
enum class InducedMap {
  kDerived,    // argmin of phi over the interior equilibria: 1 / (1 + w2 (y+eps)^2 / w1)
  kPublished,  // 1 / (1 + 100 y^2), the form printed alongside the example
};

struct IllustrativeConfig {
  double epsilon = 0.1;
  double x1_min = -10, x1_max = 10;
  double x2_min = -10, x2_max = 10;
  // phi(x) = w1 (x1 - c1)^2 + w2 (x2 - c2)^2
  double phi_w1 = 1, phi_c1 = 1, phi_w2 = 100, phi_c2 = 0;
  double y0 = 1.0;
  InducedMap induced_map = InducedMap::kDerived;
  // The operator is monotone only where y + eps = 1. When set, the game is
  // declared monotone and its oracle refuses any other y.
  bool declare_monotone = false;
};

class Illustrative {
 public:
  explicit Illustrative(IllustrativeConfig cfg);

  const IllustrativeConfig& config() const { return cfg_; }
  const SeekProblem<double>& problem() const { return problem_; }
  const ParametricGame<double>& game() const { return problem_.game; }
  const SelectionFunction<double>& phi() const { return problem_.phi; }
  const LeaderObjective<double>& leader() const { return problem_.J0; }

  /// y + eps, throwing DomainFault when not positive.
  double coupling(double y) const;

  /// (t, -(y + eps) t).
  VecD interior_equilibrium(double y, double t) const;
  bool in_interior_equilibria(double y, const VecD& x, double tol = 1e-12) const;
  /// Open interval of first-follower values with an interior equilibrium.
  std::pair<double, double> first_follower_interval(double y) const;

  double selected_x1(double y) const;
  VecD selection(double y) const;
  double induced_objective(double y) const;

  /// 2y(1 - x1) + x1(1 - eps): the leader's gradient when x1 is treated as
  /// exogenous.
  double exogenous_gradient(double y, double x1) const;
  /// Chain rule through the selected map, dx/dy by central differences.
  double exact_gradient(double y, double fd_step = 1e-6) const;

 private:
  IllustrativeConfig cfg_;
  SeekProblem<double> problem_;
};

Illustrative build_illustrative(const IllustrativeConfig& cfg);

enum class RegimeKind { kOscillating, kInexact, kExact };

struct Regime {
  RegimeKind kind = RegimeKind::kExact;
  // Exogenous first-follower sequence for kOscillating: (k, y_k) -> x_{1|k}.
  std::function<double(long, double)> sequence;

  static Regime oscillating(std::vector<double> cycle = {0.5, 1.5});
  static Regime exogenous(std::function<double(long, double)> seq);
  static Regime inexact() { return {RegimeKind::kInexact, {}}; }
  static Regime exact() { return {RegimeKind::kExact, {}}; }
};

const char* to_string(RegimeKind k);
std::optional<RegimeKind> regime_from_string(const std::string& s);

struct RegimeRecord {
  long k = 0;
  double y = 0;      // y_k, before the update
  double x1 = 0;
  double x2 = 0;
  double grad = 0;   // the direction used in y_{k+1} = y_k - eta grad
  double J0 = 0;     // J0(y_k, x_k)
};

struct RegimeTrace {
  std::vector<RegimeRecord> records;
  std::optional<std::string> fault;
  double y_final = 0;
};

/// y_{k+1} = y_k - eta grad_k for K steps; halts with a fault once y + eps
/// leaves the positive half-line or an exogenous value leaves E1^int(y_k).
RegimeTrace run_regime(const Illustrative& problem, const Regime& regime, double eta, long K,
                       double y0);

struct Prop1Report {
  bool y_converged = false;
  bool x1_converged = false;
  bool consistent = true;  // false when y converged but x1 did not
  double y_range = 0;      // over the last quarter
  double x1_range = 0;
};

/// A sequence counts as converged when its last-quarter range is below 1e-4.
Prop1Report check_prop1(const RegimeTrace& trace);

/// Minimizer of f over the grid lo, lo + step, ..., <= hi.
std::pair<double, double> grid_argmin(const std::function<double(double)>& f, double lo,
                                      double hi, double step);

}  // namespace stackseek::scenarios

#endif  // STACKSEEK_SCENARIOS_ILLUSTRATIVE_HPP
