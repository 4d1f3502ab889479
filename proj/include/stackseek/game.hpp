#ifndef STACKSEEK_GAME_HPP
#define STACKSEEK_GAME_HPP

#include "stackseek/core.hpp"
#include "stackseek/region.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace stackseek {

enum class MonotonicityClass { kStronglyMonotone, kMonotone, kUnverified };

template <typename Scalar>
struct Monotonicity {
  MonotonicityClass kind = MonotonicityClass::kUnverified;
  Scalar sigma = 0;  // modulus, only meaningful for kStronglyMonotone

  static Monotonicity strongly(Scalar s) {
    return {MonotonicityClass::kStronglyMonotone, s};
  }
  static Monotonicity monotone() { return {MonotonicityClass::kMonotone, 0}; }
  static Monotonicity unverified() { return {MonotonicityClass::kUnverified, 0}; }

  bool certified() const { return kind != MonotonicityClass::kUnverified; }
};

inline const char* to_string(MonotonicityClass c) {
  switch (c) {
    case MonotonicityClass::kStronglyMonotone: return "strongly-monotone";
    case MonotonicityClass::kMonotone: return "monotone";
    case MonotonicityClass::kUnverified: return "unverified";
  }
  return "?";
}

/// x -> F(x; y), evaluated for a fixed leader decision.
template <typename Scalar>
using FollowerOperator = std::function<Vec<Scalar>(const Vec<Scalar>&)>;

/// (x, y) -> F(x; y).
template <typename Scalar>
using PseudogradientOracle =
    std::function<Vec<Scalar>(const Vec<Scalar>&, const Vec<Scalar>&)>;

template <typename Scalar>
using JacobianOracle =
    std::function<Mat<Scalar>(const Vec<Scalar>&, const Vec<Scalar>&)>;

/// (x, y) -> J_i(x; y) for one follower.
template <typename Scalar>
using CostOracle = std::function<Scalar(const Vec<Scalar>&, const Vec<Scalar>&)>;

/// The followers' game parameterised by the leader decision. Records are
/// immutable; oracles must be pure.
template <typename Scalar>
class ParametricGame {
 public:
  ParametricGame(BlockLayout layout, int leader_dim,
                 PseudogradientOracle<Scalar> pseudogradient,
                 FeasibleRegion<Scalar> region, Monotonicity<Scalar> cls)
      : layout_(std::move(layout)),
        leader_dim_(leader_dim),
        pseudogradient_(std::move(pseudogradient)),
        region_(std::make_shared<const FeasibleRegion<Scalar>>(std::move(region))),
        class_(cls) {
    if (layout_.total() != region_->dimension())
      throw DimensionError("game: block sizes do not sum to region dimension");
    if (leader_dim_ < 1) throw DimensionError("game: leader dimension must be >= 1");
  }

  ParametricGame& with_jacobian(JacobianOracle<Scalar> jac) {
    jacobian_ = std::move(jac);
    return *this;
  }
  ParametricGame& with_costs(std::vector<CostOracle<Scalar>> costs) {
    if (static_cast<int>(costs.size()) != layout_.players())
      throw DimensionError("game: one cost oracle per follower expected");
    costs_ = std::move(costs);
    return *this;
  }

  int players() const { return layout_.players(); }
  int dimension() const { return layout_.total(); }
  int leader_dimension() const { return leader_dim_; }
  const BlockLayout& layout() const { return layout_; }
  const FeasibleRegion<Scalar>& region() const { return *region_; }
  const Monotonicity<Scalar>& monotonicity() const { return class_; }
  const PseudogradientOracle<Scalar>& pseudogradient() const { return pseudogradient_; }
  const std::optional<JacobianOracle<Scalar>>& jacobian() const { return jacobian_; }
  bool has_costs() const { return !costs_.empty(); }
  const std::vector<CostOracle<Scalar>>& costs() const { return costs_; }

  /// F(.; y) as a standalone operator.
  FollowerOperator<Scalar> at(const Vec<Scalar>& y) const;

 private:
  BlockLayout layout_;
  int leader_dim_;
  PseudogradientOracle<Scalar> pseudogradient_;
  std::shared_ptr<const FeasibleRegion<Scalar>> region_;
  Monotonicity<Scalar> class_;
  std::optional<JacobianOracle<Scalar>> jacobian_;
  std::vector<CostOracle<Scalar>> costs_;
};

/// F(x; y) = col(grad_{x_i} J_i), with dimension and finiteness checks.
template <typename Scalar>
Vec<Scalar> eval_pseudogradient(const ParametricGame<Scalar>& game,
                                const Vec<Scalar>& x, const Vec<Scalar>& y) {
  require_size(x, game.dimension(), "follower profile");
  require_size(y, game.leader_dimension(), "leader decision");
  Vec<Scalar> out = game.pseudogradient()(x, y);
  if (out.size() != game.dimension())
    throw EvaluationFault("pseudogradient returned dimension " +
                          std::to_string(out.size()));
  if (!out.allFinite()) throw EvaluationFault("pseudogradient is not finite");
  return out;
}

template <typename Scalar>
FollowerOperator<Scalar> ParametricGame<Scalar>::at(const Vec<Scalar>& y) const {
  require_size(y, leader_dim_, "leader decision");
  return [self = *this, y](const Vec<Scalar>& x) {
    return eval_pseudogradient(self, x, y);
  };
}

/// Strongly convex selection criterion phi with its gradient and modulus.
template <typename Scalar>
struct SelectionFunction {
  std::function<Scalar(const Vec<Scalar>&)> value;
  std::function<Vec<Scalar>(const Vec<Scalar>&)> gradient;
  Scalar mu = 1;

  Scalar operator()(const Vec<Scalar>& x) const { return value(x); }
};

/// phi(x) = 0.5 ||x - center||^2.
template <typename Scalar>
SelectionFunction<Scalar> half_squared_distance(Vec<Scalar> center) {
  SelectionFunction<Scalar> phi;
  phi.value = [center](const Vec<Scalar>& x) {
    return Scalar(0.5) * (x - center).squaredNorm();
  };
  phi.gradient = [center](const Vec<Scalar>& x) -> Vec<Scalar> { return x - center; };
  phi.mu = 1;
  return phi;
}

/// phi(x) = sum_j w_j (x_j - c_j)^2 with w_j > 0; modulus 2 min w.
template <typename Scalar>
SelectionFunction<Scalar> weighted_squares(Vec<Scalar> weights, Vec<Scalar> center) {
  require_size(center, weights.size(), "selection center");
  SelectionFunction<Scalar> phi;
  phi.value = [weights, center](const Vec<Scalar>& x) {
    return (weights.array() * (x - center).array().square()).sum();
  };
  phi.gradient = [weights, center](const Vec<Scalar>& x) -> Vec<Scalar> {
    return Scalar(2) * weights.cwiseProduct(x - center);
  };
  phi.mu = Scalar(2) * weights.minCoeff();
  return phi;
}

/// Optional smoothness metadata for the leader objective.
template <typename Scalar>
struct LeaderMetadata {
  std::optional<Scalar> lipschitz_y;       // L1
  std::optional<Scalar> lipschitz_x;       // L2
  std::optional<Scalar> induced_lipschitz; // L-tilde
  std::optional<Scalar> induced_smoothness;// l-tilde
  std::optional<Scalar> lower_bound;       // J0*
  std::optional<Scalar> penalty_weight;    // lambda
  std::optional<Vec<Scalar>> reference;    // y-bar
};

template <typename Scalar>
struct LeaderObjective {
  std::function<Scalar(const Vec<Scalar>&, const Vec<Scalar>&)> value;
  LeaderMetadata<Scalar> meta;

  Scalar operator()(const Vec<Scalar>& y, const Vec<Scalar>& x) const {
    const Scalar v = value(y, x);
    if (!std::isfinite(static_cast<double>(v)))
      throw EvaluationFault("leader objective is not finite");
    return v;
  }
};

}  // namespace stackseek

#endif  // STACKSEEK_GAME_HPP
