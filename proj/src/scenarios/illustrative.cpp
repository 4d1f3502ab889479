#include "stackseek/scenarios/illustrative.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace stackseek::scenarios {

namespace {

constexpr double kMonotoneSliceTol = 1e-9;

ParametricGame<double> make_game(const IllustrativeConfig& cfg) {
  VecD lo(2), hi(2);
  lo << cfg.x1_min, cfg.x2_min;
  hi << cfg.x1_max, cfg.x2_max;
  auto region = FeasibleRegion<double>::box(lo, hi);
  const double eps = cfg.epsilon;
  const bool pinned = cfg.declare_monotone;

  auto coupling = [eps, pinned](const VecD& y) {
    const double a = y(0) + eps;
    if (!(a > 0)) throw DomainFault("illustrative game requires y + eps > 0");
    if (pinned && std::abs(a - 1.0) > kMonotoneSliceTol)
      throw DomainFault("illustrative game declared monotone only at y + eps = 1");
    return a;
  };
  PseudogradientOracle<double> F = [coupling](const VecD& x, const VecD& y) {
    const double a = coupling(y);
    VecD out(2);
    out(0) = a * x(0) + x(1);
    out(1) = x(1) + a * x(0);
    return out;
  };
  ParametricGame<double> game(BlockLayout({1, 1}), 1, F, region,
                              pinned ? Monotonicity<double>::monotone()
                                     : Monotonicity<double>::unverified());
  game.with_jacobian([coupling](const VecD&, const VecD& y) {
    const double a = coupling(y);
    MatD J(2, 2);
    J << a, 1, a, 1;
    return J;
  });
  game.with_costs({
      [coupling](const VecD& x, const VecD& y) {
        return 0.5 * coupling(y) * x(0) * x(0) + x(0) * x(1);
      },
      [coupling](const VecD& x, const VecD& y) {
        return 0.5 * x(1) * x(1) + coupling(y) * x(0) * x(1);
      },
  });
  return game;
}

}  // namespace

Illustrative::Illustrative(IllustrativeConfig cfg)
    : cfg_(cfg),
      problem_{make_game(cfg),
               [&] {
                 VecD w(2), c(2);
                 w << cfg.phi_w1, cfg.phi_w2;
                 c << cfg.phi_c1, cfg.phi_c2;
                 return weighted_squares<double>(w, c);
               }(),
               LeaderObjective<double>{[](const VecD& y, const VecD& x) {
                                         return y(0) * y(0) + y(0) * (x(0) + x(1));
                                       },
                                       {}},
               VecD::Constant(1, cfg.y0)} {
  if (!(cfg.phi_w1 > 0 && cfg.phi_w2 > 0))
    throw std::invalid_argument("illustrative: phi weights must be positive");
  if (!(cfg.x1_min < cfg.x1_max && cfg.x2_min < cfg.x2_max))
    throw std::invalid_argument("illustrative: boxes must have nonempty interior");
}

Illustrative build_illustrative(const IllustrativeConfig& cfg) { return Illustrative(cfg); }

double Illustrative::coupling(double y) const {
  const double a = y + cfg_.epsilon;
  if (!(a > 0)) throw DomainFault("illustrative: y + eps must be positive");
  return a;
}

VecD Illustrative::interior_equilibrium(double y, double t) const {
  VecD x(2);
  x << t, -coupling(y) * t;
  return x;
}

bool Illustrative::in_interior_equilibria(double y, const VecD& x, double tol) const {
  const double a = coupling(y);
  return x(0) > cfg_.x1_min && x(0) < cfg_.x1_max && x(1) > cfg_.x2_min &&
         x(1) < cfg_.x2_max && std::abs(x(1) + a * x(0)) <= tol * (1.0 + std::abs(x(1)));
}

std::pair<double, double> Illustrative::first_follower_interval(double y) const {
  const double a = coupling(y);
  // x1 in (x1_min, x1_max) and -a x1 in (x2_min, x2_max).
  return {std::max(cfg_.x1_min, -cfg_.x2_max / a), std::min(cfg_.x1_max, -cfg_.x2_min / a)};
}

double Illustrative::selected_x1(double y) const {
  const double a = coupling(y);
  if (cfg_.induced_map == InducedMap::kPublished) return 1.0 / (1.0 + 100.0 * y * y);
  // minimise w1 (t - c1)^2 + w2 (-a t - c2)^2 over t
  const double w1 = cfg_.phi_w1, w2 = cfg_.phi_w2;
  return (w1 * cfg_.phi_c1 - w2 * a * cfg_.phi_c2) / (w1 + w2 * a * a);
}

VecD Illustrative::selection(double y) const { return interior_equilibrium(y, selected_x1(y)); }

double Illustrative::induced_objective(double y) const {
  return leader()(VecD::Constant(1, y), selection(y));
}

double Illustrative::exogenous_gradient(double y, double x1) const {
  return 2.0 * y * (1.0 - x1) + x1 * (1.0 - cfg_.epsilon);
}

double Illustrative::exact_gradient(double y, double fd_step) const {
  const VecD x = selection(y);
  const VecD dx = (selection(y + fd_step) - selection(y - fd_step)) / (2.0 * fd_step);
  // grad_1 J0 = 2y + x1 + x2, grad_2 J0 = (y, y)
  return 2.0 * y + x(0) + x(1) + y * (dx(0) + dx(1));
}

Regime Regime::oscillating(std::vector<double> cycle) {
  if (cycle.empty()) throw std::invalid_argument("oscillating regime needs a nonempty cycle");
  return {RegimeKind::kOscillating, [cycle = std::move(cycle)](long k, double) {
            return cycle[static_cast<std::size_t>(k) % cycle.size()];
          }};
}

Regime Regime::exogenous(std::function<double(long, double)> seq) {
  return {RegimeKind::kOscillating, std::move(seq)};
}

const char* to_string(RegimeKind k) {
  switch (k) {
    case RegimeKind::kOscillating: return "oscillating";
    case RegimeKind::kInexact: return "inexact";
    case RegimeKind::kExact: return "exact";
  }
  return "?";
}

std::optional<RegimeKind> regime_from_string(const std::string& s) {
  if (s == "oscillating") return RegimeKind::kOscillating;
  if (s == "inexact") return RegimeKind::kInexact;
  if (s == "exact") return RegimeKind::kExact;
  return std::nullopt;
}

RegimeTrace run_regime(const Illustrative& p, const Regime& regime, double eta, long K,
                       double y0) {
  if (K < 1) throw std::invalid_argument("run_regime: K must be >= 1");
  if (regime.kind == RegimeKind::kOscillating && !regime.sequence)
    throw std::invalid_argument("run_regime: oscillating regime without a sequence");
  RegimeTrace tr;
  tr.records.reserve(static_cast<std::size_t>(K));
  double y = y0;
  for (long k = 0; k < K; ++k) {
    if (!(y + p.config().epsilon > 0)) {
      tr.fault = "iteration " + std::to_string(k) + ": y + eps <= 0 (y = " +
                 std::to_string(y) + ")";
      break;
    }
    RegimeRecord r;
    r.k = k;
    r.y = y;
    switch (regime.kind) {
      case RegimeKind::kOscillating: {
        r.x1 = regime.sequence(k, y);
        const auto [lo, hi] = p.first_follower_interval(y);
        if (!(r.x1 > lo && r.x1 < hi)) {
          tr.fault = "iteration " + std::to_string(k) + ": exogenous x1 outside E1^int(y)";
          tr.y_final = y;
          return tr;
        }
        r.grad = p.exogenous_gradient(y, r.x1);
        break;
      }
      case RegimeKind::kInexact:
        r.x1 = p.selected_x1(y);
        r.grad = p.exogenous_gradient(y, r.x1);
        break;
      case RegimeKind::kExact:
        r.x1 = p.selected_x1(y);
        r.grad = p.exact_gradient(y);
        break;
    }
    r.x2 = -p.coupling(y) * r.x1;
    VecD x(2);
    x << r.x1, r.x2;
    r.J0 = p.leader()(VecD::Constant(1, y), x);
    tr.records.push_back(r);
    y -= eta * r.grad;
    if (!std::isfinite(y)) {
      tr.fault = "iteration " + std::to_string(k) + ": leader iterate diverged";
      break;
    }
  }
  tr.y_final = y;
  return tr;
}

Prop1Report check_prop1(const RegimeTrace& trace) {
  const std::size_t n = trace.records.size();
  if (n < 200) throw std::invalid_argument("check_prop1: trace must hold at least 200 records");
  const std::size_t start = n - n / 4;
  double ylo = std::numeric_limits<double>::infinity(), yhi = -ylo;
  double xlo = ylo, xhi = -ylo;
  for (std::size_t i = start; i < n; ++i) {
    ylo = std::min(ylo, trace.records[i].y);
    yhi = std::max(yhi, trace.records[i].y);
    xlo = std::min(xlo, trace.records[i].x1);
    xhi = std::max(xhi, trace.records[i].x1);
  }
  Prop1Report rep;
  rep.y_range = yhi - ylo;
  rep.x1_range = xhi - xlo;
  rep.y_converged = rep.y_range < 1e-4;
  rep.x1_converged = rep.x1_range < 1e-4;
  rep.consistent = !(rep.y_converged && !rep.x1_converged);
  return rep;
}

std::pair<double, double> grid_argmin(const std::function<double(double)>& f, double lo,
                                      double hi, double step) {
  if (!(step > 0) || !(hi >= lo)) throw std::invalid_argument("grid_argmin: bad grid");
  double best_y = lo, best_v = std::numeric_limits<double>::infinity();
  const long n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long i = 0; i <= n; ++i) {
    const double y = lo + static_cast<double>(i) * step;
    const double v = f(y);
    if (v < best_v) {
      best_v = v;
      best_y = y;
    }
  }
  return {best_y, best_v};
}

}  // namespace stackseek::scenarios
