#include "stackseek/scenarios/energy.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <numeric>
#include <set>
#include <stdexcept>

namespace stackseek::scenarios {

namespace {

constexpr int kFixedSlots = 4;  // p_g, p_mg, p_st, theta

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("energy config: " + what);
}

}  // namespace

void validate_energy_config(const EnergyConfig& c) {
  require(c.nodes >= 2, "at least two nodes");
  require(c.hours >= 1, "at least one hour");
  const auto per_node = [&](const auto& v, const char* name) {
    require(static_cast<int>(v.size()) == c.nodes, std::string(name) + " needs one entry per node");
  };
  per_node(c.demand, "demand");
  per_node(c.gen_cost, "gen_cost");
  per_node(c.gen_max, "gen_max");
  per_node(c.grid_max, "grid_max");
  per_node(c.storage_max, "storage_max");
  per_node(c.tariff, "tariff");
  for (const auto& d : c.demand)
    require(static_cast<int>(d.size()) == c.hours, "demand needs one entry per hour");
  require(static_cast<int>(c.price_ref.size()) == c.hours, "price_ref needs one entry per hour");
  require(c.y0.empty() || static_cast<int>(c.y0.size()) == c.hours,
          "y0 needs one entry per hour");
  for (int i = 0; i < c.nodes; ++i) {
    require(c.gen_max[i] >= 0 && c.grid_max[i] >= 0 && c.storage_max[i] >= 0,
            "device limits must be non-negative");
  }
  require(c.trade_max > 0, "trade_max must be positive");
  require(c.trade_quadratic >= 0, "trade_quadratic must be non-negative");
  require(c.grid_price_slope >= 0, "grid_price_slope must be non-negative");
  require(c.penalty > 0, "penalty must be positive");
  require(c.theta_max > 0, "theta_max must be positive");

  // connectivity over the line graph
  std::vector<int> parent(c.nodes);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int v) { return parent[v] == v ? v : parent[v] = find(parent[v]); };
  for (const auto& l : c.lines) {
    require(l.from >= 0 && l.from < c.nodes && l.to >= 0 && l.to < c.nodes && l.from != l.to,
            "line endpoints out of range");
    require(l.susceptance > 0 && l.limit > 0, "line susceptance and limit must be positive");
    parent[find(l.from)] = find(l.to);
  }
  for (int i = 1; i < c.nodes; ++i) require(find(i) == find(0), "network must be connected");

  std::set<std::pair<int, int>> seen;
  for (auto [i, j] : c.partners) {
    require(i >= 0 && i < c.nodes && j >= 0 && j < c.nodes && i != j,
            "trading pair out of range");
    require(seen.insert({std::min(i, j), std::max(i, j)}).second, "duplicate trading pair");
  }
}

namespace {

std::vector<std::vector<int>> partner_lists(const EnergyConfig& c) {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(c.nodes));
  for (auto [i, j] : c.partners) {
    out[i].push_back(j);
    out[j].push_back(i);
  }
  for (auto& v : out) std::sort(v.begin(), v.end());
  return out;
}

std::vector<int> block_offsets(const EnergyConfig& c, const std::vector<std::vector<int>>& p) {
  std::vector<int> off(static_cast<std::size_t>(c.nodes) + 1, 0);
  for (int i = 0; i < c.nodes; ++i)
    off[i + 1] = off[i] + c.hours * (kFixedSlots + static_cast<int>(p[i].size()));
  return off;
}

}  // namespace

EnergyConfig default_energy_config() {
  EnergyConfig c;
  c.nodes = 3;
  c.hours = 2;
  c.lines = {{0, 1, 4.0, 2.0}, {1, 2, 4.0, 2.0}};
  c.demand = {{0.8, 1.2}, {1.0, 0.6}, {0.7, 1.1}};
  c.gen_cost = {0.5, 0.0, 0.0};
  c.gen_max = {0.6, 1.5, 1.2};
  c.grid_max = {2.0, 2.0, 2.0};
  c.storage_max = {0.3, 0.4, 0.4};
  c.tariff = {1.0, 0.6, 0.2};
  c.partners = {{0, 1}, {0, 2}, {1, 2}};
  c.trade_max = 1.0;
  c.trade_quadratic = 0.25;
  c.grid_price_slope = 0.5;
  c.grid_price_base = 0.8;
  c.penalty = 1.0;
  c.price_ref = {0.3, 0.3};
  c.theta_ref = 0.0;
  c.theta_max = 1.0;
  c.y0 = {1.5, 1.5};
  return c;
}

EnergyCommunity build_energy_community(const EnergyConfig& cfg) { return EnergyCommunity(cfg); }

EnergyCommunity::EnergyCommunity(EnergyConfig cfg)
    : cfg_((validate_energy_config(cfg), std::move(cfg))),
      partners_(partner_lists(cfg_)),
      offsets_(block_offsets(cfg_, partners_)),
      reference_([&] {
        VecD r = VecD::Zero(offsets_.back());
        for (int i = 0; i < cfg_.nodes; ++i)
          for (int h = 0; h < cfg_.hours; ++h) {
            r(index_gen(i, h)) = cfg_.gen_max[i];
            r(index_theta(i, h)) = cfg_.theta_ref;
          }
        return r;
      }()),
      problem_{make_game(),
               weighted_squares<double>(VecD::Ones(offsets_.back()), reference_),
               LeaderObjective<double>{},
               cfg_.y0.empty() ? VecD(VecD::Map(cfg_.price_ref.data(), cfg_.hours))
                               : VecD(VecD::Map(cfg_.y0.data(), cfg_.hours))} {
  const VecD ref = VecD::Map(cfg_.price_ref.data(), cfg_.hours);
  const double lambda = cfg_.penalty;
  problem_.J0.value = [costs = problem_.game.costs(), ref, lambda](const VecD& y,
                                                                     const VecD& x) {
    double total = lambda * (y - ref).squaredNorm();
    for (const auto& J : costs) total += J(x, y);
    return total;
  };
  problem_.J0.meta.penalty_weight = lambda;
  problem_.J0.meta.reference = ref;
}

int EnergyCommunity::block_size(int node) const { return offsets_[node + 1] - offsets_[node]; }

int EnergyCommunity::index_gen(int node, int hour) const {
  return offsets_[node] + hour * (kFixedSlots + static_cast<int>(partners_[node].size()));
}
int EnergyCommunity::index_grid(int node, int hour) const { return index_gen(node, hour) + 1; }
int EnergyCommunity::index_storage(int node, int hour) const { return index_gen(node, hour) + 2; }

int EnergyCommunity::index_trade(int node, int partner, int hour) const {
  const auto& p = partners_[node];
  const auto it = std::find(p.begin(), p.end(), partner);
  if (it == p.end())
    throw std::invalid_argument("energy: nodes " + std::to_string(node) + " and " +
                                std::to_string(partner) + " do not trade");
  return index_gen(node, hour) + 3 + static_cast<int>(it - p.begin());
}

int EnergyCommunity::index_theta(int node, int hour) const {
  return index_gen(node, hour) + 3 + static_cast<int>(partners_[node].size());
}

double EnergyCommunity::supply_surplus(const VecD& x, int hour) const {
  double s = 0;
  for (int i = 0; i < cfg_.nodes; ++i)
    s += x(index_gen(i, hour)) + x(index_grid(i, hour)) + x(index_storage(i, hour)) -
         cfg_.demand[i][hour];
  return s;
}

double EnergyCommunity::agent_cost(int i, const VecD& x, const VecD& y) const {
  return problem_.game.costs().at(static_cast<std::size_t>(i))(x, y);
}

ParametricGame<double> EnergyCommunity::make_game() const {
  const int n = offsets_.back();
  const int N = cfg_.nodes, H = cfg_.hours;
  VecD lo(n), hi(n);
  for (int i = 0; i < N; ++i) {
    for (int h = 0; h < H; ++h) {
      lo(index_gen(i, h)) = 0;
      hi(index_gen(i, h)) = cfg_.gen_max[i];
      lo(index_grid(i, h)) = 0;
      hi(index_grid(i, h)) = cfg_.grid_max[i];
      lo(index_storage(i, h)) = -cfg_.storage_max[i];
      hi(index_storage(i, h)) = cfg_.storage_max[i];
      for (int j : partners_[i]) {
        lo(index_trade(i, j, h)) = -cfg_.trade_max;
        hi(index_trade(i, j, h)) = cfg_.trade_max;
      }
      // the root bus is the phase reference
      lo(index_theta(i, h)) = i == 0 ? cfg_.theta_ref : cfg_.theta_ref - cfg_.theta_max;
      hi(index_theta(i, h)) = i == 0 ? cfg_.theta_ref : cfg_.theta_ref + cfg_.theta_max;
    }
  }

  RegionBuilder<double> rb(lo, hi);
  const auto hs = [](int h) { return "[h" + std::to_string(h) + "]"; };
  for (int h = 0; h < H; ++h) {
    for (int i = 0; i < N; ++i) {
      VecD a = VecD::Zero(n);
      a(index_gen(i, h)) = a(index_grid(i, h)) = a(index_storage(i, h)) = 1;
      for (int j : partners_[i]) a(index_trade(i, j, h)) = 1;
      rb.add_equality(a, cfg_.demand[i][h], "balance node " + std::to_string(i) + hs(h));
    }
    for (auto [i, j] : cfg_.partners) {
      VecD a = VecD::Zero(n);
      a(index_trade(i, j, h)) = a(index_trade(j, i, h)) = 1;
      rb.add_equality(a, 0.0,
                      "reciprocity " + std::to_string(i) + "-" + std::to_string(j) + hs(h));
    }
    // Nodal flow balance: sum over incident lines of B (theta_i - theta_j)
    // equals the net injection. Node 0 is the slack bus and its row is implied.
    for (int i = 1; i < N; ++i) {
      VecD a = VecD::Zero(n);
      for (const auto& l : cfg_.lines) {
        if (l.from != i && l.to != i) continue;
        const int other = l.from == i ? l.to : l.from;
        a(index_theta(i, h)) += l.susceptance;
        a(index_theta(other, h)) -= l.susceptance;
      }
      // injection = -p_mg_i - sum_j p_tr_ij
      a(index_grid(i, h)) += 1;
      for (int j : partners_[i]) a(index_trade(i, j, h)) += 1;
      rb.add_equality(a, 0.0, "dc flow node " + std::to_string(i) + hs(h));
    }
    for (std::size_t l = 0; l < cfg_.lines.size(); ++l) {
      const auto& ln = cfg_.lines[l];
      VecD a = VecD::Zero(n);
      a(index_theta(ln.from, h)) = ln.susceptance;
      a(index_theta(ln.to, h)) = -ln.susceptance;
      const std::string name = "line " + std::to_string(ln.from) + "-" + std::to_string(ln.to);
      rb.add_inequality(a, ln.limit, name + " forward" + hs(h));
      rb.add_inequality(-a, ln.limit, name + " reverse" + hs(h));
    }
  }
  auto region = rb.build();

  std::vector<int> sizes(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) sizes[i] = block_size(i);

  // Copies of everything the oracles need, so the game outlives this object.
  struct Layout {
    int N, H;
    std::vector<std::vector<int>> gen, grid, trade_first;
    std::vector<std::vector<int>> partners;
    std::vector<double> gen_cost, tariff;
    double gamma, slope, base;
  };
  auto L = std::make_shared<Layout>();
  L->N = N;
  L->H = H;
  L->partners = partners_;
  L->gen_cost = cfg_.gen_cost;
  L->tariff = cfg_.tariff;
  L->gamma = cfg_.trade_quadratic;
  L->slope = cfg_.grid_price_slope;
  L->base = cfg_.grid_price_base;
  L->gen.assign(N, std::vector<int>(H));
  L->grid = L->gen;
  L->trade_first = L->gen;
  for (int i = 0; i < N; ++i)
    for (int h = 0; h < H; ++h) {
      L->gen[i][h] = index_gen(i, h);
      L->grid[i][h] = index_grid(i, h);
      L->trade_first[i][h] = index_gen(i, h) + 3;
    }

  PseudogradientOracle<double> F = [L](const VecD& x, const VecD& y) {
    VecD out = VecD::Zero(x.size());
    for (int h = 0; h < L->H; ++h) {
      double aggregate = 0;
      for (int k = 0; k < L->N; ++k) aggregate += x(L->grid[k][h]);
      for (int i = 0; i < L->N; ++i) {
        out(L->gen[i][h]) = L->gen_cost[i];
        const int g = L->grid[i][h];
        out(g) = L->slope * (aggregate + x(g)) + L->base;
        const int t0 = L->trade_first[i][h];
        for (std::size_t j = 0; j < L->partners[i].size(); ++j)
          out(t0 + j) = L->tariff[i] * y(h) + 2 * L->gamma * x(t0 + j);
      }
    }
    return out;
  };
  ParametricGame<double> game(BlockLayout(sizes), H, F, std::move(region),
                              Monotonicity<double>::monotone());
  game.with_jacobian([L, n](const VecD&, const VecD&) {
    MatD J = MatD::Zero(n, n);
    for (int h = 0; h < L->H; ++h)
      for (int i = 0; i < L->N; ++i) {
        for (int k = 0; k < L->N; ++k) J(L->grid[i][h], L->grid[k][h]) = L->slope;
        J(L->grid[i][h], L->grid[i][h]) += L->slope;
        const int t0 = L->trade_first[i][h];
        for (std::size_t j = 0; j < L->partners[i].size(); ++j)
          J(t0 + j, t0 + j) = 2 * L->gamma;
      }
    return J;
  });
  std::vector<CostOracle<double>> costs;
  for (int i = 0; i < N; ++i)
    costs.push_back([L, i](const VecD& x, const VecD& y) {
      double c = 0;
      for (int h = 0; h < L->H; ++h) {
        double aggregate = 0;
        for (int k = 0; k < L->N; ++k) aggregate += x(L->grid[k][h]);
        c += L->gen_cost[i] * x(L->gen[i][h]) +
             (L->slope * aggregate + L->base) * x(L->grid[i][h]);
        const int t0 = L->trade_first[i][h];
        for (std::size_t j = 0; j < L->partners[i].size(); ++j) {
          const double p = x(t0 + j);
          c += L->tariff[i] * y(h) * p + L->gamma * p * p;
        }
      }
      return c;
    });
  game.with_costs(std::move(costs));
  return game;
}

}  // namespace stackseek::scenarios
