#pragma once

#include <cmath>
#include <stdexcept>

#include "riccati/system.hpp"

namespace riccati {

enum class Mode { A, B };

inline Mode toggled(Mode m) { return m == Mode::A ? Mode::B : Mode::A; }
inline char mode_name(Mode m) { return m == Mode::A ? 'A' : 'B'; }

/// Exponential jump law of the switching signal: density f(t) = λ·e^{−λt}.
struct PoissonLaw {
  double lambda;

  explicit PoissonLaw(double lambda_) : lambda(lambda_) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
      throw std::invalid_argument("PoissonLaw: rate must be positive and finite");
    }
  }

  double density(double t) const { return lambda * std::exp(-lambda * t); }
  double cdf(double t) const { return -std::expm1(-lambda * t); }  // 1 − e^{−λt}
  double mean() const { return 1.0 / lambda; }
};

/// Two Riccati systems sharing (d, k), switched by a rate-λ Poisson signal
/// that toggles the active mode at every jump.
class SwitchedSystem {
 public:
  SwitchedSystem(RiccatiSystem a, RiccatiSystem b, double lambda)
      : sys_a_(std::move(a)), sys_b_(std::move(b)), law_(lambda) {
    if (sys_a_.dim() != sys_b_.dim() || sys_a_.k() != sys_b_.k()) {
      throw std::invalid_argument("SwitchedSystem: subsystems must share (d, k)");
    }
  }

  const RiccatiSystem& sys(Mode m) const { return m == Mode::A ? sys_a_ : sys_b_; }
  const RiccatiSystem& sys_a() const { return sys_a_; }
  const RiccatiSystem& sys_b() const { return sys_b_; }
  const PoissonLaw& law() const { return law_; }
  Eigen::Index dim() const { return sys_a_.dim(); }
  Eigen::Index k() const { return sys_a_.k(); }

 private:
  RiccatiSystem sys_a_;
  RiccatiSystem sys_b_;
  PoissonLaw law_;
};

}  // namespace riccati
