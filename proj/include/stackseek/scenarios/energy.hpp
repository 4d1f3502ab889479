#ifndef STACKSEEK_SCENARIOS_ENERGY_HPP
#define STACKSEEK_SCENARIOS_ENERGY_HPP

// Peer-to-peer trading in a small radial distribution network. Each node
// hosts one prosumer whose per-hour decision is
//   (p_g, p_mg, p_st, p_tr to each partner, theta).
// Grid power enters at node 0; line flows follow the linearized DC model.
// The leader sets one trading price per hour.

#include "stackseek/zo.hpp"

#include <string>
#include <utility>
#include <vector>

namespace stackseek::scenarios {

struct Line {
  int from = 0;
  int to = 0;
  double susceptance = 1;
  double limit = 1;
};

struct EnergyConfig {
  int nodes = 3;
  int hours = 2;
  std::vector<Line> lines;
  std::vector<std::vector<double>> demand;  // [node][hour]
  std::vector<double> gen_cost;             // linear generation cost per node
  std::vector<double> gen_max;
  std::vector<double> grid_max;             // main-grid draw limit per node
  std::vector<double> storage_max;          // |p_st| limit per node
  // Weight of the hourly price in node i's trading cost; a common weight would
  // be absorbed by the reciprocity multipliers and leave trades price-blind.
  std::vector<double> tariff;
  std::vector<std::pair<int, int>> partners;  // undirected trading pairs
  double trade_max = 1;
  double trade_quadratic = 0.25;  // gamma in gamma * p_tr^2
  double grid_price_slope = 0.5;  // main-grid price a P_h + c on aggregate draw P_h
  double grid_price_base = 0.8;
  double penalty = 1;             // lambda
  std::vector<double> price_ref;  // y-bar, one per hour
  double theta_ref = 0;
  double theta_max = 1;
  std::vector<double> y0;
};

/// Three nodes on a feeder 0-1-2, two hours, complete trading graph. Node 0
/// runs a costly generator; nodes 1 and 2 have free renewable output.
EnergyConfig default_energy_config();

class EnergyCommunity {
 public:
  explicit EnergyCommunity(EnergyConfig cfg);

  const EnergyConfig& config() const { return cfg_; }
  const SeekProblem<double>& problem() const { return problem_; }
  const ParametricGame<double>& game() const { return problem_.game; }
  const SelectionFunction<double>& phi() const { return problem_.phi; }
  const LeaderObjective<double>& leader() const { return problem_.J0; }

  int block_size(int node) const;
  int index_gen(int node, int hour) const;
  int index_grid(int node, int hour) const;
  int index_storage(int node, int hour) const;
  /// Trade of `node` with `partner` (positive: node buys).
  int index_trade(int node, int partner, int hour) const;
  int index_theta(int node, int hour) const;
  const std::vector<int>& partners_of(int node) const { return partners_[node]; }

  /// The anchor of the selection function (p_g = gen_max, theta = theta_ref, rest 0).
  const VecD& reference_point() const { return reference_; }

  /// Supply minus demand summed over nodes at an hour.
  double supply_surplus(const VecD& x, int hour) const;
  double agent_cost(int node, const VecD& x, const VecD& y) const;

 private:
  EnergyConfig cfg_;
  std::vector<std::vector<int>> partners_;
  std::vector<int> offsets_;
  VecD reference_;
  SeekProblem<double> problem_;

  ParametricGame<double> make_game() const;
};

/// Throws std::invalid_argument naming the first structural problem.
void validate_energy_config(const EnergyConfig& cfg);

EnergyCommunity build_energy_community(const EnergyConfig& cfg);

}  // namespace stackseek::scenarios

#endif  // STACKSEEK_SCENARIOS_ENERGY_HPP
