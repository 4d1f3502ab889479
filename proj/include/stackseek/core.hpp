#ifndef STACKSEEK_CORE_HPP
#define STACKSEEK_CORE_HPP

#include <Eigen/Dense>

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace stackseek {

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using VecD = Vec<double>;
using MatD = Mat<double>;

/// Raised when a caller passes vectors whose sizes disagree with the problem.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An oracle returned a NaN or infinity.
class EvaluationFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter left the domain where the model is defined (e.g. y + eps <= 0).
class DomainFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The declared monotonicity class of a game is contradicted by the iterates.
class ClassViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The shared affine system has no point inside the boxes.
class InfeasibleRegion : public std::runtime_error {
 public:
  InfeasibleRegion(const std::string& row, double violation)
      : std::runtime_error("infeasible region: row '" + row + "' violated by " +
                           std::to_string(violation)),
        row_(row),
        violation_(violation) {}
  const std::string& row() const { return row_; }
  double violation() const { return violation_; }

 private:
  std::string row_;
  double violation_;
};

/// An iterative routine ran out of budget. Solvers report this through their
/// result structs; this exception is used where a result cannot be returned.
class NonConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Partition of the follower profile into per-player blocks.
class BlockLayout {
 public:
  BlockLayout() = default;
  explicit BlockLayout(std::vector<int> sizes) : sizes_(std::move(sizes)) {
    offsets_.reserve(sizes_.size());
    int off = 0;
    for (int s : sizes_) {
      if (s <= 0) throw DimensionError("block sizes must be positive");
      offsets_.push_back(off);
      off += s;
    }
    total_ = off;
  }

  int players() const { return static_cast<int>(sizes_.size()); }
  int size(int i) const { return sizes_.at(i); }
  int offset(int i) const { return offsets_.at(i); }
  int total() const { return total_; }

  template <typename Derived>
  auto block(Eigen::MatrixBase<Derived>& x, int i) const {
    return x.segment(offset(i), size(i));
  }
  template <typename Derived>
  auto block(const Eigen::MatrixBase<Derived>& x, int i) const {
    return x.segment(offset(i), size(i));
  }

 private:
  std::vector<int> sizes_;
  std::vector<int> offsets_;
  int total_ = 0;
};

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& v) {
  return v.allFinite();
}

template <typename Derived>
void require_size(const Eigen::MatrixBase<Derived>& v, Eigen::Index n,
                  const char* what) {
  if (v.size() != n) {
    throw DimensionError(std::string(what) + ": expected dimension " +
                         std::to_string(n) + ", got " +
                         std::to_string(v.size()));
  }
}

}  // namespace stackseek

#endif  // STACKSEEK_CORE_HPP
