#ifndef STACKSEEK_ZO_HPP
#define STACKSEEK_ZO_HPP

// Zeroth-order induced Stackelberg equilibrium seeking: the leader probes the
// Tikhonov-regularized follower game at y_k and at y_k + delta_k v_k, forms a
// two-point gradient estimate and takes a descent step, while beta_k vanishes
// faster than the step and perturbation schedules.

#include "stackseek/game.hpp"
#include "stackseek/philox.hpp"
#include "stackseek/tikhonov.hpp"
#include "stackseek/vi.hpp"

#include <cmath>
#include <functional>
#include <future>
#include <optional>
#include <string>
#include <vector>

namespace stackseek {

template <typename Scalar>
struct ScheduleParams {
  Scalar eta_bar = Scalar(0.1);
  Scalar delta_bar = Scalar(0.5);
  Scalar beta_bar = Scalar(1);
  Scalar alpha = Scalar(1);
  int m = 1;

  /// Throws std::invalid_argument on alpha <= 1/2, non-positive radii, or a
  /// step base above m / (2 l-tilde) when the smoothness is known.
  void validate(std::optional<Scalar> induced_smoothness = std::nullopt) const {
    if (!(alpha > Scalar(0.5))) throw std::invalid_argument("alpha must exceed 0.5");
    if (!(eta_bar >= 0)) throw std::invalid_argument("eta_bar must be non-negative");
    if (!(delta_bar > 0)) throw std::invalid_argument("delta_bar must be positive");
    if (!(beta_bar > 0)) throw std::invalid_argument("beta_bar must be positive");
    if (m < 1) throw std::invalid_argument("leader dimension must be >= 1");
    if (induced_smoothness && *induced_smoothness > 0 &&
        eta_bar > Scalar(m) / (Scalar(2) * *induced_smoothness))
      throw std::invalid_argument("eta_bar must not exceed m / (2 l-tilde)");
  }
};

template <typename Scalar>
struct ScheduleValues {
  Scalar eta, delta, beta;
};

/// eta_k = eta_bar (k+1)^{-1/2} / m, delta_k = delta_bar (k+1)^{-1/4} / sqrt(m),
/// beta_k = beta_bar (k+1)^{-alpha}.
template <typename Scalar>
ScheduleValues<Scalar> schedule(long k, const ScheduleParams<Scalar>& p) {
  if (k < 0) throw std::invalid_argument("schedule: k must be >= 0");
  const Scalar kp1 = Scalar(k + 1);
  const Scalar m = Scalar(p.m);
  return {p.eta_bar / (std::sqrt(kp1) * m),
          p.delta_bar / (std::pow(kp1, Scalar(0.25)) * std::sqrt(m)),
          p.beta_bar * std::pow(kp1, -p.alpha)};
}

/// (sum_{k<=K} beta_k^2 eta_k delta_k^{-2}) / (sum_{k<=K} eta_k): the weight of
/// the regularization bias in the stationarity bound.
template <typename Scalar>
Scalar timescale_ratio(const ScheduleParams<Scalar>& p, long K) {
  Scalar num = 0, den = 0;
  for (long k = 0; k <= K; ++k) {
    const auto s = schedule(k, p);
    num += s.beta * s.beta * s.eta / (s.delta * s.delta);
    den += s.eta;
  }
  return num / den;
}

/// Uniform direction on the unit sphere of R^m (normalized Gaussian).
template <typename Scalar>
Vec<Scalar> sample_sphere(int m, Philox4x32& rng) {
  if (m < 1) throw std::invalid_argument("sample_sphere: m must be >= 1");
  Vec<Scalar> v(m);
  for (;;) {
    for (int i = 0; i < m; ++i) v(i) = static_cast<Scalar>(rng.normal());
    const Scalar n = v.norm();
    if (n > Scalar(0) && std::isfinite(static_cast<double>(n))) return v / n;
  }
}

/// Two-point estimate (m/delta) (J0(y_hat, x_hat) - J0(y, x)) v. With
/// paper_sign the difference is reversed, reproducing the literal published
/// formula (which ascends under y <- y - eta g).
template <typename Scalar>
Vec<Scalar> estimate_gradient(const LeaderObjective<Scalar>& J0, const Vec<Scalar>& y,
                              const Vec<Scalar>& y_hat, const Vec<Scalar>& x,
                              const Vec<Scalar>& x_hat, Scalar delta, int m,
                              const Vec<Scalar>& v, bool paper_sign = false) {
  if (!(delta > 0)) throw std::invalid_argument("estimate_gradient: delta must be positive");
  require_size(y, m, "leader decision");
  require_size(y_hat, m, "perturbed leader decision");
  require_size(v, m, "direction");
  if (std::abs(v.norm() - Scalar(1)) > Scalar(1e-9))
    throw std::invalid_argument("estimate_gradient: direction must be a unit vector");
  if ((y_hat - (y + delta * v)).cwiseAbs().maxCoeff() >
      Scalar(1e-12) * (Scalar(1) + y.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("estimate_gradient: y_hat must equal y + delta v");
  const Scalar diff = J0(y_hat, x_hat) - J0(y, x);
  return (Scalar(m) / delta) * (paper_sign ? -diff : diff) * v;
}

template <typename Scalar>
struct SeekProblem {
  ParametricGame<Scalar> game;
  SelectionFunction<Scalar> phi;
  LeaderObjective<Scalar> J0;
  Vec<Scalar> y0;

  int m() const { return game.leader_dimension(); }
};

template <typename Scalar>
struct TraceRecord {
  long k = 0;
  Vec<Scalar> y, v, y_hat, x, x_hat, g_hat;
  Scalar eta = 0, delta = 0, beta = 0;
  Scalar J0 = 0, J0_hat = 0;
  ViSolveReport<Scalar> inner, inner_hat;
};

template <typename Scalar>
struct Trace {
  std::vector<TraceRecord<Scalar>> records;
  std::optional<std::string> fault;  // set when the run halted early
  Vec<Scalar> y_final;               // y_K (after the last update)
};

template <typename Scalar>
struct SeekOptions {
  ViSolveParams<Scalar> inner{};       // tol overwritten per iteration
  ToleranceRule<Scalar> inner_tol{};
  bool paper_sign = false;
  bool parallel_inner = false;          // run the two follower solves concurrently
};

/// Runs K leader iterations. Deterministic given the generator state and
/// parameters; the two follower solves per iteration are warm-started from
/// their own previous solutions, so running them concurrently changes nothing.
template <typename Scalar>
Trace<Scalar> seek(const SeekProblem<Scalar>& problem, const ScheduleParams<Scalar>& params,
                   long K, Philox4x32& rng, const SeekOptions<Scalar>& opts = {}) {
  if (K < 1) throw std::invalid_argument("seek: K must be >= 1");
  const int m = problem.m();
  if (params.m != m) throw DimensionError("seek: schedule m differs from leader dimension");
  require_size(problem.y0, m, "initial leader decision");
  params.validate(problem.J0.meta.induced_smoothness);

  Trace<Scalar> trace;
  trace.records.reserve(static_cast<std::size_t>(K));
  Vec<Scalar> y = problem.y0;
  std::optional<Vec<Scalar>> warm = opts.inner.warm_start, warm_hat = opts.inner.warm_start;

  for (long k = 0; k < K; ++k) {
    const auto s = schedule(k, params);
    TraceRecord<Scalar> rec;
    rec.k = k;
    rec.eta = s.eta;
    rec.delta = s.delta;
    rec.beta = s.beta;
    rec.y = y;
    rec.v = sample_sphere<Scalar>(m, rng);
    rec.y_hat = y + s.delta * rec.v;

    ViSolveParams<Scalar> p = opts.inner, p_hat = opts.inner;
    p.tol = p_hat.tol = opts.inner_tol(s.beta);
    p.warm_start = warm;
    p_hat.warm_start = warm_hat;

    try {
      if (opts.parallel_inner) {
        auto fut = std::async(std::launch::async, [&] {
          return solve_regularized(problem.game, problem.phi, s.beta, rec.y_hat, p_hat);
        });
        rec.inner = solve_regularized(problem.game, problem.phi, s.beta, rec.y, p);
        rec.inner_hat = fut.get();
      } else {
        rec.inner = solve_regularized(problem.game, problem.phi, s.beta, rec.y, p);
        rec.inner_hat = solve_regularized(problem.game, problem.phi, s.beta, rec.y_hat, p_hat);
      }
    } catch (const std::exception& e) {
      trace.fault = "iteration " + std::to_string(k) + ": " + e.what();
      break;
    }
    if (!rec.inner.converged || !rec.inner_hat.converged) {
      trace.fault = "iteration " + std::to_string(k) +
                    ": follower solve did not converge (residuals " +
                    std::to_string(static_cast<double>(rec.inner.residual)) + ", " +
                    std::to_string(static_cast<double>(rec.inner_hat.residual)) + ")";
      break;
    }
    rec.x = rec.inner.x;
    rec.x_hat = rec.inner_hat.x;
    rec.J0 = problem.J0(rec.y, rec.x);
    rec.J0_hat = problem.J0(rec.y_hat, rec.x_hat);
    const Scalar diff = rec.J0_hat - rec.J0;
    rec.g_hat = (Scalar(m) / s.delta) * (opts.paper_sign ? -diff : diff) * rec.v;

    warm = rec.x;
    warm_hat = rec.x_hat;
    y = y - s.eta * rec.g_hat;
    trace.records.push_back(std::move(rec));
  }
  trace.y_final = y;
  return trace;
}

template <typename Scalar>
using SelectionOracle = std::function<Vec<Scalar>(const Vec<Scalar>&)>;

/// grad of y -> J0(y, x*_phi(y)) by central differences.
template <typename Scalar>
Vec<Scalar> induced_gradient(const LeaderObjective<Scalar>& J0,
                             const SelectionOracle<Scalar>& selection, const Vec<Scalar>& y,
                             std::optional<Scalar> fd_step = std::nullopt) {
  const Scalar h = fd_step ? *fd_step : Scalar(1e-4) * (Scalar(1) + y.norm());
  Vec<Scalar> g(y.size());
  Vec<Scalar> yp = y, ym = y;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    yp(i) = y(i) + h;
    ym(i) = y(i) - h;
    g(i) = (J0(yp, selection(yp)) - J0(ym, selection(ym))) / (Scalar(2) * h);
    yp(i) = y(i);
    ym(i) = y(i);
  }
  return g;
}

/// (sum eta_k ||grad J0(y_k, x*_phi(y_k))||^2) / (sum eta_k) over the first
/// `count` records (all when count < 0).
template <typename Scalar>
Scalar stationarity_profile(const Trace<Scalar>& trace, const LeaderObjective<Scalar>& J0,
                            const SelectionOracle<Scalar>& selection,
                            std::optional<Scalar> fd_step = std::nullopt, long count = -1) {
  const long n = count < 0 ? static_cast<long>(trace.records.size())
                           : std::min<long>(count, static_cast<long>(trace.records.size()));
  if (n < 1) throw std::invalid_argument("stationarity_profile: empty trace");
  Scalar num = 0, den = 0;
  for (long k = 0; k < n; ++k) {
    const auto& r = trace.records[static_cast<std::size_t>(k)];
    num += r.eta * induced_gradient(J0, selection, r.y, fd_step).squaredNorm();
    den += r.eta;
  }
  return num / den;
}

/// Selection oracle backed by the Tikhonov path; throws NonConvergence when
/// the path budget runs out.
template <typename Scalar>
SelectionOracle<Scalar> tikhonov_selection(const ParametricGame<Scalar>& game,
                                           const SelectionFunction<Scalar>& phi,
                                           TikhonovPathParams<Scalar> path = {}) {
  return [game, phi, path](const Vec<Scalar>& y) {
    auto rep = optimal_selection(game, phi, y, path);
    if (!rep.converged)
      throw NonConvergence("optimal selection path did not converge");
    return rep.x;
  };
}

}  // namespace stackseek

#endif  // STACKSEEK_ZO_HPP
