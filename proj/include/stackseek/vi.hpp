#ifndef STACKSEEK_VI_HPP
#define STACKSEEK_VI_HPP

#include "stackseek/core.hpp"
#include "stackseek/game.hpp"
#include "stackseek/philox.hpp"
#include "stackseek/region.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>

namespace stackseek {

template <typename Scalar>
struct ViSolveParams {
  int max_iterations = 2000000;
  std::optional<Scalar> step;  // empty: 0.9 / L-hat (extragradient)
  Scalar tol = Scalar(1e-8);   // natural-residual target
  std::optional<Vec<Scalar>> warm_start;
  Scalar projection_tol = 0;   // 0: tol / 100
  int divergence_window = 50;
  int lipschitz_probes = 20;
  std::uint64_t probe_seed = 0x5eed;
  bool allow_unverified = false;
};

template <typename Scalar>
struct ViSolveReport {
  Vec<Scalar> x;
  Scalar residual = 0;
  int iterations = 0;
  bool converged = false;
  Scalar tol = 0;
  Scalar step = 0;
  Scalar lipschitz_estimate = 0;
};

enum class ViMethod { kExtragradient, kProjectedGradient };

namespace detail {

template <typename Scalar>
Scalar projection_tolerance(const ViSolveParams<Scalar>& p) {
  return p.projection_tol > 0 ? p.projection_tol : p.tol / Scalar(100);
}

template <typename Scalar>
Vec<Scalar> project(const FeasibleRegion<Scalar>& region, const Vec<Scalar>& z,
                    Scalar tol, DualWarmStart<Scalar>* warm) {
  if (!region.has_affine_rows()) return z.cwiseMax(region.lower()).cwiseMin(region.upper());
  auto res = region.project(z, ProjectionParams<Scalar>{tol, 1000000}, warm);
  if (!res.converged)
    throw NonConvergence("projection did not reach tolerance (kkt " +
                         std::to_string(static_cast<double>(res.kkt_residual)) + ")");
  return std::move(res.x);
}

}  // namespace detail

/// ||x - P(x - F(x))||, zero exactly on SOL(F, region).
template <typename Scalar, typename Op>
Scalar natural_residual(const Op& F, const FeasibleRegion<Scalar>& region,
                        const Vec<Scalar>& x, Scalar projection_tol = Scalar(1e-13),
                        DualWarmStart<Scalar>* warm = nullptr) {
  require_size(x, region.dimension(), "natural_residual point");
  if (!x.allFinite()) throw EvaluationFault("natural_residual: non-finite point");
  const Vec<Scalar> Fx = F(x);
  return (x - detail::project(region, Vec<Scalar>(x - Fx), projection_tol, warm)).norm();
}

/// Power-iteration estimate of the local Lipschitz constant of F around x.
template <typename Scalar, typename Op>
Scalar estimate_lipschitz(const Op& F, const Vec<Scalar>& x, int probes,
                          std::uint64_t seed) {
  Philox4x32 rng(seed, 0x6c6970u);
  Vec<Scalar> d(x.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = static_cast<Scalar>(rng.normal());
  d.normalize();
  const Scalar h = Scalar(1e-4) * (Scalar(1) + x.norm());
  const Vec<Scalar> F0 = F(x);
  Scalar best = 0;
  for (int t = 0; t < probes; ++t) {
    const Vec<Scalar> diff = F(Vec<Scalar>(x + h * d)) - F0;
    const Scalar nrm = diff.norm();
    best = std::max(best, nrm / h);
    if (nrm > Scalar(0)) {
      d = diff / nrm;
    } else {
      for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = static_cast<Scalar>(rng.normal());
      d.normalize();
    }
  }
  return best;
}

/// Solves VI(F, region). Extragradient with step 0.9/L-hat and a local
/// Lipschitz backtracking guard, or plain projected gradient with step
/// sigma/L-hat^2 when `method` says so. Stops once the natural residual is at
/// most params.tol; budget exhaustion returns converged = false.
template <typename Scalar, typename Op>
ViSolveReport<Scalar> solve_operator(const Op& F, const FeasibleRegion<Scalar>& region,
                                     ViMethod method, Scalar sigma,
                                     const ViSolveParams<Scalar>& params) {
  if (!(params.tol > 0)) throw std::invalid_argument("ViSolveParams: tol must be positive");
  if (params.max_iterations < 1)
    throw std::invalid_argument("ViSolveParams: max_iterations must be >= 1");

  const Scalar ptol = detail::projection_tolerance(params);
  DualWarmStart<Scalar> warm_a, warm_b, warm_r;

  Vec<Scalar> x = params.warm_start ? *params.warm_start : region.feasible_point();
  require_size(x, region.dimension(), "warm start");
  x = detail::project(region, x, ptol, &warm_a);

  ViSolveReport<Scalar> rep;
  rep.tol = params.tol;
  rep.lipschitz_estimate = estimate_lipschitz<Scalar>(F, x, params.lipschitz_probes,
                                                      params.probe_seed);
  const Scalar Lhat = std::max(rep.lipschitz_estimate, Scalar(1e-12));
  Scalar step;
  if (params.step) {
    step = *params.step;
  } else if (method == ViMethod::kProjectedGradient) {
    step = sigma / (Scalar(1.1) * Lhat * Scalar(1.1) * Lhat);
  } else {
    step = Scalar(0.9) / Lhat;
  }
  if (!(step > 0)) throw std::invalid_argument("VI step size must be positive");

  Scalar last_rg = std::numeric_limits<Scalar>::infinity();
  int rising = 0;
  Vec<Scalar> Fx, xbar, Fbar;

  for (int it = 0; it < params.max_iterations; ++it) {
    Fx = F(x);
    if (!Fx.allFinite()) throw EvaluationFault("operator returned non-finite values");
    xbar = detail::project(region, Vec<Scalar>(x - step * Fx), ptol, &warm_a);
    const Scalar rg = (x - xbar).norm();

    // r(1) lies in [r(step) min(1, 1/step), r(step) max(1, 1/step)].
    if (rg * std::min(Scalar(1), Scalar(1) / step) <= params.tol) {
      const Scalar r1 =
          (x - detail::project(region, Vec<Scalar>(x - Fx), ptol, &warm_r)).norm();
      if (r1 <= params.tol) {
        rep.x = x;
        rep.residual = r1;
        rep.iterations = it;
        rep.converged = true;
        rep.step = step;
        return rep;
      }
    }

    if (rg > last_rg) {
      if (++rising >= params.divergence_window)
        throw ClassViolation("natural residual increased for " +
                             std::to_string(params.divergence_window) +
                             " consecutive iterations");
    } else {
      rising = 0;
    }
    last_rg = rg;

    if (method == ViMethod::kProjectedGradient) {
      x = xbar;
      continue;
    }
    Fbar = F(xbar);
    if (!Fbar.allFinite()) throw EvaluationFault("operator returned non-finite values");
    if (step * (Fx - Fbar).norm() > Scalar(0.95) * rg && rg > Scalar(0)) {
      step /= Scalar(2);
      rising = 0;
      last_rg = std::numeric_limits<Scalar>::infinity();
      continue;
    }
    x = detail::project(region, Vec<Scalar>(x - step * Fbar), ptol, &warm_b);
  }

  rep.x = x;
  rep.residual = natural_residual<Scalar>(F, region, x, ptol, &warm_r);
  rep.iterations = params.max_iterations;
  rep.converged = rep.residual <= params.tol;
  rep.step = step;
  return rep;
}

/// Approximates a v-GNE: a solution of VI(F(.; y), Omega).
template <typename Scalar>
ViSolveReport<Scalar> solve_vi(const ParametricGame<Scalar>& game, const Vec<Scalar>& y,
                               const ViSolveParams<Scalar>& params = {}) {
  require_size(y, game.leader_dimension(), "leader decision");
  const auto& cls = game.monotonicity();
  if (!cls.certified() && !params.allow_unverified)
    throw std::invalid_argument("solve_vi requires a game declared monotone");
  const auto F = game.at(y);
  if (cls.kind == MonotonicityClass::kStronglyMonotone)
    return solve_operator<Scalar>(F, game.region(), ViMethod::kProjectedGradient,
                                  cls.sigma, params);
  return solve_operator<Scalar>(F, game.region(), ViMethod::kExtragradient, Scalar(0),
                                params);
}

}  // namespace stackseek

#endif  // STACKSEEK_VI_HPP
