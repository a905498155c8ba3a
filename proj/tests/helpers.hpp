#pragma once

#include <Eigen/Dense>

#include "riccati/switched.hpp"
#include "riccati/system.hpp"

namespace riccati::testing {

/// dy/dt = ω(1 + y²): a line rotating at angular speed ω; escapes from angle θ
/// after ((π/2) − θ)/ω.
inline RiccatiSystem rotation_system(double omega) {
  Eigen::MatrixXd a(2, 2);
  a << 0.0, -omega, omega, 0.0;
  return {a, 1};
}

/// dy/dt = y² + 2y: escapes from y(0) = 1 at (log 3)/2; no escape from y ≤ 0.
inline RiccatiSystem scalar_quadratic_system() {
  Eigen::MatrixXd a(2, 2);
  a << -1.0, -1.0, 0.0, 1.0;
  return {a, 1};
}

/// Vector-valued system on ℝ^{2×1} with distinct real eigenvalues
/// 1.4605, −0.7609, −2.6996.
inline RiccatiSystem three_dim_system() {
  Eigen::MatrixXd a(3, 3);
  a << -1.0, 2.0, -1.0, 0.0, 2.0, -1.0, -1.0, 3.0, -3.0;
  return {a, 1};
}

/// Two counter-rotating lines (speeds ω and −γ) switched at rate λ.
inline SwitchedSystem counter_rotation_switch(double omega, double gamma, double lambda) {
  return {rotation_system(omega), rotation_system(-gamma), lambda};
}

inline Eigen::MatrixXd scalar_state(double y) {
  Eigen::MatrixXd m(1, 1);
  m(0, 0) = y;
  return m;
}

}  // namespace riccati::testing
