#pragma once

#include <Eigen/Dense>

#include "riccati/numerics.hpp"

namespace riccati {

/// One deterministic Riccati differential equation
///
///   dY/dt = A21 + A22·Y − Y·A11 − Y·A12·Y,   Y(t) ∈ ℝ^{(d−k)×k},
///
/// induced by a d×d matrix A partitioned at block size k (0 < k < d).
/// Immutable after construction; the spectral norms used by the
/// guaranteed-existence step are cached here.
class RiccatiSystem {
 public:
  RiccatiSystem(Eigen::MatrixXd a, Eigen::Index k);

  const Eigen::MatrixXd& a() const { return a_; }
  Eigen::Index k() const { return k_; }
  Eigen::Index dim() const { return a_.rows(); }
  Eigen::Index codim() const { return a_.rows() - k_; }

  auto a11() const { return a_.topLeftCorner(k_, k_); }
  auto a12() const { return a_.topRightCorner(k_, codim()); }
  auto a21() const { return a_.bottomLeftCorner(codim(), k_); }
  auto a22() const { return a_.bottomRightCorner(codim(), codim()); }

  /// ‖A‖ (largest singular value).
  double norm() const { return norm_a_; }
  /// ‖[I 0]·A‖, the norm of the top k rows of A.
  double top_rows_norm() const { return norm_top_; }
  /// False iff the top block-row of A vanishes; then U(t) ≡ I and no state escapes.
  bool escape_possible() const { return norm_top_ > 0.0; }

 private:
  Eigen::MatrixXd a_;
  Eigen::Index k_;
  double norm_a_ = 0.0;
  double norm_top_ = 0.0;
};

/// Quadratic right-hand side A21 + A22·Y − Y·A11 − Y·A12·Y.
Eigen::MatrixXd rde_rhs(const RiccatiSystem& sys, const Eigen::MatrixXd& y);

}  // namespace riccati
