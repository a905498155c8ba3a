#include "riccati/system.hpp"

#include <stdexcept>

namespace riccati {

RiccatiSystem::RiccatiSystem(Eigen::MatrixXd a, Eigen::Index k) : a_(std::move(a)), k_(k) {
  if (a_.rows() != a_.cols() || a_.rows() < 2) {
    throw std::invalid_argument("RiccatiSystem: A must be square with dimension >= 2");
  }
  if (k_ <= 0 || k_ >= a_.rows()) {
    throw std::invalid_argument("RiccatiSystem: block size k must satisfy 0 < k < d");
  }
  detail::require_finite(a_, "RiccatiSystem");
  norm_a_ = spectral_norm(a_);
  const Eigen::MatrixXd top = a_.topRows(k_);
  norm_top_ = top.isZero(0.0) ? 0.0 : spectral_norm(top);
}

Eigen::MatrixXd rde_rhs(const RiccatiSystem& sys, const Eigen::MatrixXd& y) {
  if (y.rows() != sys.codim() || y.cols() != sys.k()) {
    throw std::invalid_argument("rde_rhs: state must be (d-k) x k");
  }
  detail::require_finite(y, "rde_rhs");
  return sys.a21() + sys.a22() * y - y * sys.a11() - y * sys.a12() * y;
}

}  // namespace riccati
