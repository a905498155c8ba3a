#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace riccati {

/// A k-dimensional subspace of ℝ^d, stored as a d×k matrix with orthonormal
/// columns. Two values with the same column space are the same point.
struct SubspacePoint {
  Eigen::MatrixXd basis;

  Eigen::Index dim() const { return basis.rows(); }
  Eigen::Index rank() const { return basis.cols(); }
};

/// Canonical chart: Y ↦ span[I; Y], orthonormalized.
SubspacePoint chart_embed(const Eigen::MatrixXd& y);

/// Inverse chart: the unique Y with span[I; Y] = P when the top k×k block of
/// the basis is invertible; nullopt (off-chart, the escape set) otherwise.
std::optional<Eigen::MatrixXd> chart_retract(const SubspacePoint& p);

/// Metric ρ(P1, P2) = ‖π1 − π2‖, the spectral norm of the difference of the
/// orthogonal projections onto the two subspaces.
double grassmann_distance(const SubspacePoint& p1, const SubspacePoint& p2);

/// A line through the origin of ℝ², identified with its angle in [−π/2, π/2).
/// The boundary angles ±π/2 are one projective point (the escape set).
struct ProjectiveAngle {
  double theta = 0.0;
};

/// Reduce an arbitrary angle mod π into [−π/2, π/2).
ProjectiveAngle normalize_angle(double theta);

/// ρ between two lines in ℝ²: |sin(θ1 − θ2)|.
double angle_distance(ProjectiveAngle a, ProjectiveAngle b);

/// Unit-vector basis of the line at a given angle.
SubspacePoint line_at(ProjectiveAngle a);

/// Angle of a 1-dimensional subspace of ℝ².
ProjectiveAngle angle_of(const SubspacePoint& p);

/// Finite net of lines: ceil(π/ε) + 1 uniformly spaced angles strictly inside
/// (−π/2, π/2), such that every line lies within grassmann_distance ε of the
/// net (the projective wrap ±π/2 is covered by the endpoints).
std::vector<ProjectiveAngle> build_net(double epsilon);

}  // namespace riccati
