#include "riccati/grassmann.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "riccati/numerics.hpp"

namespace riccati {

namespace {
// Top-block singular values below this mean the point has left the chart.
constexpr double kOffChartTol = 1e-12;
}  // namespace

SubspacePoint chart_embed(const Eigen::MatrixXd& y) {
  detail::require_finite(y, "chart_embed");
  const Eigen::Index k = y.cols();
  const Eigen::Index d = y.rows() + k;
  Eigen::MatrixXd stacked(d, k);
  stacked.topRows(k) = Eigen::MatrixXd::Identity(k, k);
  stacked.bottomRows(y.rows()) = y;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(stacked);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, k);
  return {std::move(q)};
}

std::optional<Eigen::MatrixXd> chart_retract(const SubspacePoint& p) {
  const Eigen::Index k = p.rank();
  if (k < 1 || p.dim() <= k) {
    throw std::invalid_argument("chart_retract: basis must be d x k with 0 < k < d");
  }
  const Eigen::MatrixXd top = p.basis.topRows(k);
  if (min_singular_value(top) < kOffChartTol) return std::nullopt;
  const Eigen::MatrixXd bottom = p.basis.bottomRows(p.dim() - k);
  return Eigen::MatrixXd(top.transpose().partialPivLu().solve(bottom.transpose()).transpose());
}

double grassmann_distance(const SubspacePoint& p1, const SubspacePoint& p2) {
  if (p1.dim() != p2.dim() || p1.rank() != p2.rank()) {
    throw std::invalid_argument("grassmann_distance: points must share (d, k)");
  }
  const Eigen::MatrixXd proj1 = p1.basis * p1.basis.transpose();
  const Eigen::MatrixXd proj2 = p2.basis * p2.basis.transpose();
  return spectral_norm(proj1 - proj2);
}

ProjectiveAngle normalize_angle(double theta) {
  if (!std::isfinite(theta)) throw std::invalid_argument("normalize_angle: non-finite angle");
  constexpr double pi = std::numbers::pi;
  double t = std::fmod(theta + pi / 2.0, pi);
  if (t < 0.0) t += pi;
  return {t - pi / 2.0};
}

double angle_distance(ProjectiveAngle a, ProjectiveAngle b) {
  return std::abs(std::sin(a.theta - b.theta));
}

SubspacePoint line_at(ProjectiveAngle a) {
  Eigen::MatrixXd basis(2, 1);
  basis << std::cos(a.theta), std::sin(a.theta);
  return {std::move(basis)};
}

ProjectiveAngle angle_of(const SubspacePoint& p) {
  if (p.dim() != 2 || p.rank() != 1) {
    throw std::invalid_argument("angle_of: expects a line in R^2");
  }
  return normalize_angle(std::atan2(p.basis(1, 0), p.basis(0, 0)));
}

std::vector<ProjectiveAngle> build_net(double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("build_net: epsilon must be positive");
  constexpr double pi = std::numbers::pi;
  const auto count = static_cast<std::size_t>(std::ceil(pi / epsilon)) + 1;
  const double spacing = pi / static_cast<double>(count);
  std::vector<ProjectiveAngle> net;
  net.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    net.push_back({-pi / 2.0 + (static_cast<double>(j) + 0.5) * spacing});
  }
  return net;
}

}  // namespace riccati
