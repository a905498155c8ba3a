#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace riccati {

/// A matrix counts as singular when min σ < kSingularRelTol · max(1, max σ).
inline constexpr double kSingularRelTol = 1e-9;

namespace detail {

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* who) {
  if (!m.allFinite()) {
    throw std::invalid_argument(std::string(who) + ": non-finite matrix entry");
  }
}

}  // namespace detail

/// Largest singular value of a dense matrix.
template <typename Derived>
typename Derived::Scalar spectral_norm(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (m.rows() == 0 || m.cols() == 0) {
    throw std::invalid_argument("spectral_norm: empty matrix");
  }
  detail::require_finite(m, "spectral_norm");
  Eigen::JacobiSVD<Mat> svd(m.derived());
  return svd.singularValues()(0);
}

/// Smallest singular value of a square matrix; 0 (to tolerance) iff singular.
template <typename Derived>
typename Derived::Scalar min_singular_value(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("min_singular_value: matrix must be square");
  }
  if (m.rows() == 0) {
    throw std::invalid_argument("min_singular_value: empty matrix");
  }
  detail::require_finite(m, "min_singular_value");
  Eigen::JacobiSVD<Mat> svd(m.derived());
  return svd.singularValues()(m.rows() - 1);
}

/// Scale-invariant singularity test: min σ < kSingularRelTol · max(1, max σ).
template <typename Derived>
bool is_numerically_singular(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw std::invalid_argument("is_numerically_singular: matrix must be square and nonempty");
  }
  Eigen::JacobiSVD<Mat> svd(m.derived());
  const auto& sv = svd.singularValues();
  const Scalar largest = sv(0);
  const Scalar smallest = sv(m.rows() - 1);
  return smallest < Scalar(kSingularRelTol) * std::max(Scalar(1), largest);
}

/// Principal-branch Lambert W on [0, ∞), the inverse of w ↦ w·e^w.
///
/// Halley iteration seeded with log1p(x); stops once |w·e^w − x| ≤ 1e-12·max(x, 1)
/// or after 50 steps (cubic convergence makes ~5 typical).
template <typename Scalar>
Scalar lambert_w0(Scalar x) {
  static_assert(std::is_floating_point_v<Scalar>);
  if (!(x >= Scalar(0))) {
    throw std::domain_error("lambert_w0: argument must be nonnegative");
  }
  if (x == Scalar(0)) return Scalar(0);
  Scalar w = std::log1p(x);
  for (int it = 0; it < 50; ++it) {
    const Scalar ew = std::exp(w);
    const Scalar f = w * ew - x;
    if (std::abs(f) <= Scalar(1e-12) * std::max(x, Scalar(1))) break;
    const Scalar wp1 = w + Scalar(1);
    w -= f / (ew * wp1 - (w + Scalar(2)) * f / (Scalar(2) * wp1));
  }
  return w;
}

/// e^{A·t} by scaling-and-squaring around a diagonal Padé(6,6) core.
///
/// The scaled matrix is kept at infinity-norm ≤ 0.5, inside the order-6
/// full-accuracy radius, then squared back up.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> matrix_exp(
    const Eigen::MatrixBase<Derived>& a, typename Derived::Scalar t = typename Derived::Scalar(1)) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("matrix_exp: matrix must be square");
  }
  detail::require_finite(a, "matrix_exp");
  if (!std::isfinite(static_cast<double>(t))) {
    throw std::invalid_argument("matrix_exp: non-finite time");
  }

  const Eigen::Index n = a.rows();
  Mat b = a.derived() * t;
  const Scalar norm_inf = b.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm_inf > Scalar(0.5)) {
    squarings = static_cast<int>(std::ceil(std::log2(static_cast<double>(norm_inf) / 0.5)));
    b *= Scalar(std::ldexp(1.0, -squarings));
  }

  // Diagonal Padé(6,6): c_{j+1} = c_j (6−j) / ((12−j)(j+1)).
  static constexpr double kPade6[7] = {1.0,       1.0 / 2.0,     5.0 / 44.0, 1.0 / 66.0,
                                       1.0 / 792.0, 1.0 / 15840.0, 1.0 / 665280.0};
  const Mat id = Mat::Identity(n, n);
  const Mat b2 = b * b;
  const Mat b4 = b2 * b2;
  const Mat b6 = b4 * b2;
  const Mat even = Scalar(kPade6[0]) * id + Scalar(kPade6[2]) * b2 + Scalar(kPade6[4]) * b4 +
                   Scalar(kPade6[6]) * b6;
  const Mat odd = b * (Scalar(kPade6[1]) * id + Scalar(kPade6[3]) * b2 + Scalar(kPade6[5]) * b4);
  Mat r = (even - odd).partialPivLu().solve(even + odd);
  for (int i = 0; i < squarings; ++i) r = r * r;
  return r;
}

}  // namespace riccati
