#ifndef STACKSEEK_AUDIT_HPP
#define STACKSEEK_AUDIT_HPP

// Sampling guardrails for the declared properties of games, selection
// functions and leader objectives. None of these prove anything; they look
// for counterexamples.

#include "stackseek/core.hpp"
#include "stackseek/game.hpp"
#include "stackseek/philox.hpp"
#include "stackseek/region.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <utility>

namespace stackseek {

/// Uniform draw in the box, projected onto the region.
template <typename Scalar>
Vec<Scalar> sample_feasible(const FeasibleRegion<Scalar>& region, Philox4x32& rng,
                            DualWarmStart<Scalar>* warm = nullptr) {
  Vec<Scalar> z(region.dimension());
  for (Eigen::Index i = 0; i < z.size(); ++i)
    z(i) = region.lower()(i) +
           (region.upper()(i) - region.lower()(i)) * static_cast<Scalar>(rng.uniform());
  if (!region.has_affine_rows()) return z;
  return region.project(z, ProjectionParams<Scalar>{Scalar(1e-11), 500000}, warm).x;
}

template <typename Scalar>
struct MonotonicityReport {
  Scalar min_inner = std::numeric_limits<Scalar>::infinity();  // shifted by sigma
  std::optional<std::pair<Vec<Scalar>, Vec<Scalar>>> violating_pair;
  int samples = 0;
  bool passed = true;
};

/// Minimum of <F(x) - F(x'), x - x'> - sigma ||x - x'||^2 over sampled
/// feasible pairs, sigma taken from the declared class (0 otherwise).
/// Fails below -1e-10.
template <typename Scalar>
MonotonicityReport<Scalar> check_monotonicity(const ParametricGame<Scalar>& game,
                                              const Vec<Scalar>& y, int sample_count,
                                              std::uint64_t rng_seed) {
  if (sample_count < 1) throw std::invalid_argument("sample_count must be >= 1");
  const Scalar sigma =
      game.monotonicity().kind == MonotonicityClass::kStronglyMonotone
          ? game.monotonicity().sigma
          : Scalar(0);
  constexpr Scalar kThreshold = Scalar(-1e-10);
  Philox4x32 rng(rng_seed, 0x6d6f6e6fu);
  DualWarmStart<Scalar> warm;
  MonotonicityReport<Scalar> rep;
  for (int s = 0; s < sample_count; ++s) {
    const Vec<Scalar> a = sample_feasible(game.region(), rng, &warm);
    const Vec<Scalar> b = sample_feasible(game.region(), rng, &warm);
    const Vec<Scalar> d = a - b;
    const Scalar inner = (eval_pseudogradient(game, a, y) -
                          eval_pseudogradient(game, b, y)).dot(d) -
                         sigma * d.squaredNorm();
    if (inner < rep.min_inner) {
      rep.min_inner = inner;
      if (inner < kThreshold) rep.violating_pair = std::make_pair(a, b);
    }
    ++rep.samples;
  }
  rep.passed = rep.min_inner >= kThreshold;
  return rep;
}

template <typename Scalar>
struct ConvexityReport {
  Scalar min_relative_gap = std::numeric_limits<Scalar>::infinity();
  int samples = 0;
  bool passed = true;
};

/// Checks phi(z) >= phi(x) + grad(x)^T (z - x) + (mu/2)||z - x||^2 on pairs
/// drawn from N(0, radius^2 I). The gap is taken relative to
/// max(1, (mu/2)||z - x||^2); the check fails below -1e-8.
template <typename Scalar>
ConvexityReport<Scalar> check_strong_convexity(const SelectionFunction<Scalar>& phi,
                                               Scalar mu_claim, int dimension,
                                               int sample_count, std::uint64_t rng_seed,
                                               Scalar radius = Scalar(10)) {
  if (!(mu_claim > 0)) throw std::invalid_argument("mu_claim must be positive");
  Philox4x32 rng(rng_seed, 0x636f6e76u);
  ConvexityReport<Scalar> rep;
  Vec<Scalar> x(dimension), z(dimension);
  for (int s = 0; s < sample_count; ++s) {
    for (int i = 0; i < dimension; ++i) {
      x(i) = radius * static_cast<Scalar>(rng.normal());
      z(i) = radius * static_cast<Scalar>(rng.normal());
    }
    const Scalar quad = Scalar(0.5) * mu_claim * (z - x).squaredNorm();
    const Scalar gap = phi.value(z) - phi.value(x) - phi.gradient(x).dot(z - x) - quad;
    rep.min_relative_gap = std::min(rep.min_relative_gap, gap / std::max(Scalar(1), quad));
    ++rep.samples;
  }
  rep.passed = rep.min_relative_gap >= Scalar(-1e-8);
  return rep;
}

/// Central finite difference of a scalar function.
template <typename Scalar, typename Fn>
Vec<Scalar> central_difference(const Fn& f, const Vec<Scalar>& x, Scalar step) {
  Vec<Scalar> g(x.size());
  Vec<Scalar> xp = x, xm = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    xp(i) = x(i) + step;
    xm(i) = x(i) - step;
    g(i) = (f(xp) - f(xm)) / (Scalar(2) * step);
    xp(i) = x(i);
    xm(i) = x(i);
  }
  return g;
}

/// max ||g - fd||_inf / max(1, ||g||_inf) over the supplied points.
template <typename Scalar, typename Value, typename Grad>
Scalar gradient_fd_error(const Value& value, const Grad& gradient,
                         const std::vector<Vec<Scalar>>& points,
                         Scalar step = Scalar(1e-6)) {
  Scalar worst = 0;
  for (const auto& p : points) {
    const Vec<Scalar> g = gradient(p);
    const Vec<Scalar> fd = central_difference<Scalar>(value, p, step);
    const Scalar scale = std::max(Scalar(1), g.cwiseAbs().maxCoeff());
    worst = std::max(worst, (g - fd).cwiseAbs().maxCoeff() / scale);
  }
  return worst;
}

/// Same measure for the pseudogradient against per-player cost oracles:
/// block i of F is compared with the difference quotient of J_i in x_i.
template <typename Scalar>
Scalar pseudogradient_fd_error(const ParametricGame<Scalar>& game, const Vec<Scalar>& y,
                               const std::vector<Vec<Scalar>>& points,
                               Scalar step = Scalar(1e-6)) {
  if (!game.has_costs())
    throw std::invalid_argument("pseudogradient_fd_error: game has no cost oracles");
  const auto& L = game.layout();
  Scalar worst = 0;
  for (const auto& p : points) {
    const Vec<Scalar> F = eval_pseudogradient(game, p, y);
    Vec<Scalar> fd(p.size());
    for (int i = 0; i < L.players(); ++i) {
      const auto& J = game.costs()[i];
      for (int j = 0; j < L.size(i); ++j) {
        const int idx = L.offset(i) + j;
        Vec<Scalar> xp = p, xm = p;
        xp(idx) += step;
        xm(idx) -= step;
        fd(idx) = (J(xp, y) - J(xm, y)) / (Scalar(2) * step);
      }
    }
    const Scalar scale = std::max(Scalar(1), F.cwiseAbs().maxCoeff());
    worst = std::max(worst, (F - fd).cwiseAbs().maxCoeff() / scale);
  }
  return worst;
}

template <typename Scalar>
struct LipschitzReport {
  Scalar max_ratio = 0;  // largest |J0(y,x) - J0(y,x')| / ||x - x'||
  int samples = 0;
  bool passed = true;
};

/// Samples feasible pairs and compares the observed difference quotients in x
/// with the declared L2. Passes vacuously when L2 is not declared.
template <typename Scalar>
LipschitzReport<Scalar> check_leader_lipschitz(const LeaderObjective<Scalar>& J0,
                                               const FeasibleRegion<Scalar>& region,
                                               const Vec<Scalar>& y, int sample_count,
                                               std::uint64_t rng_seed) {
  Philox4x32 rng(rng_seed, 0x6c697073u);
  DualWarmStart<Scalar> warm;
  LipschitzReport<Scalar> rep;
  for (int s = 0; s < sample_count; ++s) {
    const Vec<Scalar> a = sample_feasible(region, rng, &warm);
    const Vec<Scalar> b = sample_feasible(region, rng, &warm);
    const Scalar dist = (a - b).norm();
    if (dist == Scalar(0)) continue;
    rep.max_ratio = std::max(rep.max_ratio, std::abs(J0(y, a) - J0(y, b)) / dist);
    ++rep.samples;
  }
  if (J0.meta.lipschitz_x)
    rep.passed = rep.max_ratio <= *J0.meta.lipschitz_x * (Scalar(1) + Scalar(1e-12));
  return rep;
}

}  // namespace stackseek

#endif  // STACKSEEK_AUDIT_HPP
