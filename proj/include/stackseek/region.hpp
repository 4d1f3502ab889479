#ifndef STACKSEEK_REGION_HPP
#define STACKSEEK_REGION_HPP

#include "stackseek/core.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace stackseek {

/// Euclidean projection onto the box [lo, hi] (componentwise clamp).
template <typename Scalar>
Vec<Scalar> project_box(const Vec<Scalar>& z, const Vec<Scalar>& lo,
                        const Vec<Scalar>& hi) {
  require_size(lo, z.size(), "project_box lo");
  require_size(hi, z.size(), "project_box hi");
  if ((lo.array() > hi.array()).any())
    throw std::invalid_argument("project_box: lo must not exceed hi");
  return z.cwiseMax(lo).cwiseMin(hi);
}

template <typename Scalar>
struct ProjectionParams {
  Scalar tol = Scalar(1e-12);  // KKT residual of the dual iteration
  int max_iterations = 200000;
};

template <typename Scalar>
struct ProjectionResult {
  Vec<Scalar> x;
  Scalar kkt_residual = 0;  // max of affine infeasibility and complementarity
  int iterations = 0;
  bool converged = true;
};

/// Multipliers carried between projections of nearby points.
template <typename Scalar>
struct DualWarmStart {
  Vec<Scalar> ineq;  // >= 0
  Vec<Scalar> eq;    // free sign
};

template <typename Scalar>
class FeasibleRegion;

/// Collects boxes and affine rows, then runs the feasibility solve in build().
template <typename Scalar>
class RegionBuilder {
 public:
  RegionBuilder(Vec<Scalar> lo, Vec<Scalar> hi)
      : lo_(std::move(lo)), hi_(std::move(hi)) {
    require_size(hi_, lo_.size(), "region hi");
  }

  int dimension() const { return static_cast<int>(lo_.size()); }

  /// Adds a^T x <= b.
  RegionBuilder& add_inequality(const Vec<Scalar>& a, Scalar b,
                                std::string name = {}) {
    require_size(a, lo_.size(), "inequality row");
    ineq_rows_.push_back(a);
    ineq_rhs_.push_back(b);
    ineq_names_.push_back(name.empty() ? "ineq" + std::to_string(ineq_rows_.size() - 1)
                                       : std::move(name));
    return *this;
  }

  /// Adds a^T x = b, stored as the pair a^T x <= b, -a^T x <= -b.
  RegionBuilder& add_equality(const Vec<Scalar>& a, Scalar b,
                              std::string name = {}) {
    require_size(a, lo_.size(), "equality row");
    eq_rows_.push_back(a);
    eq_rhs_.push_back(b);
    eq_names_.push_back(name.empty() ? "eq" + std::to_string(eq_rows_.size() - 1)
                                     : std::move(name));
    return *this;
  }

  FeasibleRegion<Scalar> build(ProjectionParams<Scalar> feasibility = {}) const;

 private:
  friend class FeasibleRegion<Scalar>;
  Vec<Scalar> lo_, hi_;
  std::vector<Vec<Scalar>> ineq_rows_, eq_rows_;
  std::vector<Scalar> ineq_rhs_, eq_rhs_;
  std::vector<std::string> ineq_names_, eq_names_;
};

/// Boxes lo <= x <= hi plus a shared affine system A x <= b. Immutable once
/// built; the constructor has already found a feasible point.
template <typename Scalar>
class FeasibleRegion {
 public:
  static FeasibleRegion box(Vec<Scalar> lo, Vec<Scalar> hi) {
    return RegionBuilder<Scalar>(std::move(lo), std::move(hi)).build();
  }

  int dimension() const { return static_cast<int>(lo_.size()); }
  const Vec<Scalar>& lower() const { return lo_; }
  const Vec<Scalar>& upper() const { return hi_; }
  bool has_affine_rows() const { return a_in_.rows() + a_eq_.rows() > 0; }
  int inequality_rows() const { return static_cast<int>(a_in_.rows()); }
  int equality_rows() const { return static_cast<int>(a_eq_.rows()); }
  const Mat<Scalar>& inequality_matrix() const { return a_in_; }
  const Vec<Scalar>& inequality_rhs() const { return b_in_; }
  const Mat<Scalar>& equality_matrix() const { return a_eq_; }
  const Vec<Scalar>& equality_rhs() const { return b_eq_; }
  const std::vector<std::string>& inequality_names() const { return in_names_; }
  const std::vector<std::string>& equality_names() const { return eq_names_; }

  /// The shared system in pure inequality form: genuine inequalities first,
  /// then each equality as the pair (a, b), (-a, -b).
  Mat<Scalar> A() const {
    Mat<Scalar> out(a_in_.rows() + 2 * a_eq_.rows(), dimension());
    out.topRows(a_in_.rows()) = a_in_;
    for (Eigen::Index r = 0; r < a_eq_.rows(); ++r) {
      out.row(a_in_.rows() + 2 * r) = a_eq_.row(r);
      out.row(a_in_.rows() + 2 * r + 1) = -a_eq_.row(r);
    }
    return out;
  }
  Vec<Scalar> b() const {
    Vec<Scalar> out(b_in_.size() + 2 * b_eq_.size());
    out.head(b_in_.size()) = b_in_;
    for (Eigen::Index r = 0; r < b_eq_.size(); ++r) {
      out(b_in_.size() + 2 * r) = b_eq_(r);
      out(b_in_.size() + 2 * r + 1) = -b_eq_(r);
    }
    return out;
  }

  /// Point found by the construction-time feasibility solve.
  const Vec<Scalar>& feasible_point() const { return feasible_point_; }

  /// Largest violation over boxes and affine rows (0 when feasible).
  Scalar violation(const Vec<Scalar>& x) const {
    require_size(x, dimension(), "violation point");
    Scalar v = std::max<Scalar>(Scalar(0), (lo_ - x).maxCoeff());
    v = std::max(v, (x - hi_).maxCoeff());
    if (a_in_.rows() > 0) v = std::max(v, (a_in_ * x - b_in_).maxCoeff());
    if (a_eq_.rows() > 0) v = std::max(v, (a_eq_ * x - b_eq_).cwiseAbs().maxCoeff());
    return v;
  }

  /// Name and amount of the worst-violated affine row at x.
  std::pair<std::string, Scalar> worst_row(const Vec<Scalar>& x) const {
    std::pair<std::string, Scalar> worst{"", Scalar(0)};
    for (Eigen::Index r = 0; r < a_in_.rows(); ++r) {
      const Scalar v = a_in_.row(r).dot(x) - b_in_(r);
      if (v > worst.second) worst = {in_names_[r], v};
    }
    for (Eigen::Index r = 0; r < a_eq_.rows(); ++r) {
      const Scalar v = std::abs(a_eq_.row(r).dot(x) - b_eq_(r));
      if (v > worst.second) worst = {eq_names_[r], v};
    }
    return worst;
  }

  /// Projection onto the region by accelerated projected dual ascent on the
  /// affine rows, clamping to the boxes in the primal. Multipliers in `warm`
  /// seed the iteration and receive the final values.
  ProjectionResult<Scalar> project(const Vec<Scalar>& z,
                                   const ProjectionParams<Scalar>& params = {},
                                   DualWarmStart<Scalar>* warm = nullptr) const;

 private:
  friend class RegionBuilder<Scalar>;
  FeasibleRegion() = default;

  Vec<Scalar> lo_, hi_;
  Mat<Scalar> a_in_, a_eq_;
  Vec<Scalar> b_in_, b_eq_;
  std::vector<std::string> in_names_, eq_names_;
  Scalar dual_step_ = 0;
  Vec<Scalar> feasible_point_;
};

template <typename Scalar>
FeasibleRegion<Scalar> RegionBuilder<Scalar>::build(
    ProjectionParams<Scalar> feasibility) const {
  if ((lo_.array() > hi_.array()).any())
    throw std::invalid_argument("region: lower bound exceeds upper bound");
  if (!lo_.allFinite() || !hi_.allFinite())
    throw std::invalid_argument("region: box bounds must be finite");

  FeasibleRegion<Scalar> r;
  const Eigen::Index n = lo_.size();
  r.lo_ = lo_;
  r.hi_ = hi_;
  r.a_in_.resize(static_cast<Eigen::Index>(ineq_rows_.size()), n);
  r.b_in_.resize(static_cast<Eigen::Index>(ineq_rows_.size()));
  for (std::size_t i = 0; i < ineq_rows_.size(); ++i) {
    r.a_in_.row(i) = ineq_rows_[i].transpose();
    r.b_in_(i) = ineq_rhs_[i];
  }
  r.a_eq_.resize(static_cast<Eigen::Index>(eq_rows_.size()), n);
  r.b_eq_.resize(static_cast<Eigen::Index>(eq_rows_.size()));
  for (std::size_t i = 0; i < eq_rows_.size(); ++i) {
    r.a_eq_.row(i) = eq_rows_[i].transpose();
    r.b_eq_(i) = eq_rhs_[i];
  }
  r.in_names_ = ineq_names_;
  r.eq_names_ = eq_names_;

  const Vec<Scalar> center = (lo_ + hi_) / Scalar(2);
  if (!r.has_affine_rows()) {
    r.feasible_point_ = center;
    return r;
  }

  Mat<Scalar> stacked(r.a_in_.rows() + r.a_eq_.rows(), n);
  stacked << r.a_in_, r.a_eq_;
  const Mat<Scalar> gram = stacked * stacked.transpose();
  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> eig(gram, Eigen::EigenvaluesOnly);
  const Scalar top = eig.eigenvalues().maxCoeff();
  if (!(top > Scalar(0)))
    throw std::invalid_argument("region: affine rows are all zero");
  r.dual_step_ = Scalar(1) / top;

  const auto res = r.project(center, feasibility);
  const Scalar feas_tol = std::max<Scalar>(Scalar(1e-7), Scalar(100) * feasibility.tol);
  const auto [row, amount] = r.worst_row(res.x);
  if (amount > feas_tol) throw InfeasibleRegion(row, static_cast<double>(amount));
  r.feasible_point_ = res.x;
  return r;
}

template <typename Scalar>
ProjectionResult<Scalar> FeasibleRegion<Scalar>::project(
    const Vec<Scalar>& z, const ProjectionParams<Scalar>& params,
    DualWarmStart<Scalar>* warm) const {
  require_size(z, dimension(), "projection point");
  ProjectionResult<Scalar> out;
  if (!has_affine_rows()) {
    out.x = z.cwiseMax(lo_).cwiseMin(hi_);
    return out;
  }

  const Eigen::Index p_in = a_in_.rows();
  const Eigen::Index p_eq = a_eq_.rows();
  Vec<Scalar> lam = Vec<Scalar>::Zero(p_in);
  Vec<Scalar> nu = Vec<Scalar>::Zero(p_eq);
  if (warm && warm->ineq.size() == p_in && warm->eq.size() == p_eq) {
    lam = warm->ineq;
    nu = warm->eq;
  }
  Vec<Scalar> lam_prev = lam, nu_prev = nu;
  Vec<Scalar> w_lam(p_in), w_nu(p_eq), g_in(p_in), g_eq(p_eq);
  Vec<Scalar> lam_next(p_in), nu_next(p_eq), x(z.size());
  Scalar t = 1;
  const Scalar step = dual_step_;

  for (int it = 0; it < params.max_iterations; ++it) {
    const Scalar t_next = (Scalar(1) + std::sqrt(Scalar(1) + Scalar(4) * t * t)) / Scalar(2);
    const Scalar mom = (t - Scalar(1)) / t_next;
    w_lam = lam + mom * (lam - lam_prev);
    w_nu = nu + mom * (nu - nu_prev);
    w_lam = w_lam.cwiseMax(Scalar(0));

    x = z;
    if (p_in > 0) x.noalias() -= a_in_.transpose() * w_lam;
    if (p_eq > 0) x.noalias() -= a_eq_.transpose() * w_nu;
    x = x.cwiseMax(lo_).cwiseMin(hi_);

    if (p_in > 0) g_in.noalias() = a_in_ * x - b_in_;
    if (p_eq > 0) g_eq.noalias() = a_eq_ * x - b_eq_;
    lam_next = (w_lam + step * g_in).cwiseMax(Scalar(0));
    nu_next = w_nu + step * g_eq;

    Scalar kkt = 0;
    if (p_in > 0) kkt = ((lam_next - w_lam) / step).cwiseAbs().maxCoeff();
    if (p_eq > 0) kkt = std::max(kkt, g_eq.cwiseAbs().maxCoeff());
    out.iterations = it + 1;
    if (kkt <= params.tol) {
      out.x = x;
      out.kkt_residual = kkt;
      out.converged = true;
      if (warm) {
        warm->ineq = w_lam;
        warm->eq = w_nu;
      }
      return out;
    }

    // Gradient-based adaptive restart.
    const Scalar progress = (lam_next - w_lam).dot(lam_next - lam) +
                            (nu_next - w_nu).dot(nu_next - nu);
    lam_prev = lam;
    nu_prev = nu;
    lam = lam_next;
    nu = nu_next;
    if (progress < Scalar(0)) {
      t = 1;
      lam_prev = lam;
      nu_prev = nu;
    } else {
      t = t_next;
    }
    out.kkt_residual = kkt;
  }
  out.x = x;
  out.converged = false;
  if (warm) {
    warm->ineq = lam;
    warm->eq = nu;
  }
  return out;
}

/// Free-function form of FeasibleRegion::project with an explicit tolerance.
template <typename Scalar>
ProjectionResult<Scalar> project_polyhedron(const Vec<Scalar>& z,
                                            const FeasibleRegion<Scalar>& region,
                                            Scalar tol,
                                            int max_iterations = 200000) {
  return region.project(z, ProjectionParams<Scalar>{tol, max_iterations});
}

}  // namespace stackseek

#endif  // STACKSEEK_REGION_HPP
