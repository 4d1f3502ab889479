#ifndef STACKSEEK_TIKHONOV_HPP
#define STACKSEEK_TIKHONOV_HPP

#include "stackseek/game.hpp"
#include "stackseek/vi.hpp"

#include <algorithm>
#include <vector>

namespace stackseek {

/// Inner residual target at regularization level beta:
/// max(floor, min(base, beta^2 * scale)).
template <typename Scalar>
struct ToleranceRule {
  Scalar base = Scalar(1e-6);
  Scalar scale = Scalar(1);
  Scalar floor = Scalar(1e-13);

  Scalar operator()(Scalar beta) const {
    return std::max(floor, std::min(base, beta * beta * scale));
  }
};

/// x -> F(x; y) + beta grad phi(x). With beta = 0 the game's oracle is
/// returned unchanged.
template <typename Scalar>
PseudogradientOracle<Scalar> regularized_operator(const ParametricGame<Scalar>& game,
                                                  const SelectionFunction<Scalar>& phi,
                                                  Scalar beta) {
  if (beta < 0) throw std::invalid_argument("regularized_operator: beta must be >= 0");
  if (beta == Scalar(0)) return game.pseudogradient();
  return [F = game.pseudogradient(), grad = phi.gradient, beta](const Vec<Scalar>& x,
                                                               const Vec<Scalar>& y) {
    Vec<Scalar> out = F(x, y);
    out.noalias() += beta * grad(x);
    return out;
  };
}

/// x_beta(y): the unique solution of VI(F + beta grad phi, Omega).
template <typename Scalar>
ViSolveReport<Scalar> solve_regularized(const ParametricGame<Scalar>& game,
                                        const SelectionFunction<Scalar>& phi, Scalar beta,
                                        const Vec<Scalar>& y,
                                        const ViSolveParams<Scalar>& params = {}) {
  if (!(beta > 0)) throw std::invalid_argument("solve_regularized: beta must be positive");
  require_size(y, game.leader_dimension(), "leader decision");
  const auto& cls = game.monotonicity();
  if (!cls.certified() && !params.allow_unverified)
    throw std::invalid_argument("solve_regularized requires a game declared monotone");
  const auto Fb = regularized_operator(game, phi, beta);
  const auto F = [&Fb, &y, n = game.dimension()](const Vec<Scalar>& x) {
    Vec<Scalar> out = Fb(x, y);
    if (out.size() != n) throw EvaluationFault("regularized operator dimension mismatch");
    return out;
  };
  if (cls.kind == MonotonicityClass::kStronglyMonotone)
    return solve_operator<Scalar>(F, game.region(), ViMethod::kProjectedGradient,
                                  cls.sigma + beta * phi.mu, params);
  return solve_operator<Scalar>(F, game.region(), ViMethod::kExtragradient, Scalar(0),
                                params);
}

template <typename Scalar>
struct TikhonovPathParams {
  Scalar beta0 = 1;
  Scalar decay = Scalar(0.5);        // rho
  Scalar path_tol = Scalar(1e-6);    // stop when consecutive solutions are this close
  ToleranceRule<Scalar> inner_tol{};
  int max_stages = 80;
  ViSolveParams<Scalar> inner{};     // tol is overwritten per stage
};

template <typename Scalar>
struct SelectionReport {
  Vec<Scalar> x;
  std::vector<Scalar> betas;
  std::vector<Scalar> gaps;  // gaps[j] = ||x_{beta_{j+1}} - x_{beta_j}||
  std::vector<ViSolveReport<Scalar>> stages;
  bool converged = false;
};

/// x*_phi(y): follows x_beta(y) along beta_j = beta0 rho^j with warm starts
/// until two consecutive stage solutions are within path_tol.
template <typename Scalar>
SelectionReport<Scalar> optimal_selection(const ParametricGame<Scalar>& game,
                                          const SelectionFunction<Scalar>& phi,
                                          const Vec<Scalar>& y,
                                          const TikhonovPathParams<Scalar>& path = {}) {
  if (!(path.beta0 > 0)) throw std::invalid_argument("path: beta0 must be positive");
  if (!(path.decay > 0 && path.decay < 1))
    throw std::invalid_argument("path: decay must lie in (0, 1)");
  if (!(path.path_tol > 0)) throw std::invalid_argument("path: path_tol must be positive");

  SelectionReport<Scalar> rep;
  ViSolveParams<Scalar> inner = path.inner;

  // On a singleton solution set the selection is vacuous.
  if (game.monotonicity().kind == MonotonicityClass::kStronglyMonotone) {
    inner.tol = path.inner_tol.base;
    auto r = solve_vi(game, y, inner);
    rep.x = r.x;
    rep.converged = r.converged;
    rep.stages.push_back(std::move(r));
    return rep;
  }

  Scalar beta = path.beta0;
  for (int j = 0; j < path.max_stages; ++j, beta *= path.decay) {
    inner.tol = path.inner_tol(beta);
    auto r = solve_regularized(game, phi, beta, y, inner);
    rep.betas.push_back(beta);
    if (!r.converged) {
      rep.x = r.x;
      rep.stages.push_back(std::move(r));
      return rep;
    }
    if (j > 0) rep.gaps.push_back((r.x - rep.x).norm());
    rep.x = r.x;
    inner.warm_start = r.x;
    rep.stages.push_back(std::move(r));
    if (j > 0 && rep.gaps.back() <= path.path_tol) {
      rep.converged = true;
      return rep;
    }
  }
  return rep;
}

}  // namespace stackseek

#endif  // STACKSEEK_TIKHONOV_HPP
