#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "riccati/system.hpp"

namespace riccati {

/// Thrown when the top block-row [I 0]·A is zero: U(t) ≡ I, no trajectory can
/// escape, and the guaranteed-existence step is undefined.
class NoEscapeFromLinearPart : public std::runtime_error {
 public:
  NoEscapeFromLinearPart() : std::runtime_error("top block-row of A is zero; escape impossible") {}
};

/// Partitioned linear state [U(t); V(t)] = e^{At}·[I; Y0] with Y(t) = V(t)·U(t)⁻¹.
struct FlowState {
  Eigen::MatrixXd u;  // k×k
  Eigen::MatrixXd v;  // (d−k)×k
  double t = 0.0;
};

/// Raw linear evaluation of [U(t); V(t)]; does not certify existence of Y(t).
FlowState flow_state(const RiccatiSystem& sys, const Eigen::MatrixXd& y0, double t);

/// Guaranteed-existence step from state y:
///   Δ = W(‖A‖ / (‖[I 0]A‖·‖[I; y]‖)) / ‖A‖  >  0,
/// such that the solution through y exists on [0, Δ].
/// Throws NoEscapeFromLinearPart when ‖[I 0]A‖ = 0.
double delta_step(const RiccatiSystem& sys, const Eigen::MatrixXd& y);

/// Solution Y(t; y0) = V(t)·U(t)⁻¹, certified to exist on all of [0, t] by
/// chaining guaranteed-existence steps plus a singularity check at the
/// endpoint. Returns nullopt when the trajectory escapes before t.
std::optional<Eigen::MatrixXd> flow(const RiccatiSystem& sys, const Eigen::MatrixXd& y0, double t);

struct EscapeOptions {
  int max_steps = 10000;
  double t_cap = 50.0;
  double tol = 1e-8;  // step stall threshold and final bracket width
};

/// Outcome of an escape-time computation.
///
/// Finite: the step sequence stalled and a singularity of U was bracketed to
/// width < tol; `time` is the bracket midpoint. NotBefore: the sequence
/// crossed t_cap, certifying existence up to the cap. NoEscapeFromLinearPart:
/// U(t) ≡ I, escape is impossible for every initial state.
struct EscapeResult {
  enum class Kind { Finite, NotBefore, NoEscapeFromLinearPart };

  Kind kind = Kind::NotBefore;
  double time = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> steps;  // raw iterates t_0 = 0, t_1, …, t_N

  bool finite() const { return kind == Kind::Finite; }
  /// Escape time as a double: the finite time, or +∞ for both other outcomes.
  double time_or_infinity() const {
    return finite() ? time : std::numeric_limits<double>::infinity();
  }

  static EscapeResult finite_at(double t, std::vector<double> steps);
  static EscapeResult not_before(double cap, std::vector<double> steps);
  static EscapeResult no_escape();
};

/// Escape time of the trajectory through y0 via the increasing step sequence
/// t_{n+1} = t_n + Δ(t_n) (t_0 = 0), which converges to the escape time from
/// below, followed by a bisection refinement on the singularity of U.
EscapeResult escape_time(const RiccatiSystem& sys, const Eigen::MatrixXd& y0,
                         const EscapeOptions& opts = {});

using StateSampler = std::function<Eigen::MatrixXd(std::mt19937_64&)>;

/// Entrywise-uniform initial states on [low, high]^{rows×cols}.
StateSampler box_sampler(Eigen::Index rows, Eigen::Index cols, double low, double high);
/// Uniform angle in (−π/2, π/2) mapped through the scalar chart y = tan θ (d = 2, k = 1).
StateSampler angle_sampler();

struct ProfilePoint {
  Eigen::MatrixXd state;
  double escape_time;  // +∞ when the seed does not escape before the cap
};

struct ProfileOptions {
  int n_steps = 60;
  double t_cap = 50.0;
  double tol = 1e-8;
  std::uint64_t seed = 0;
  int threads = 1;
};

/// Escape time as a function of the initial state: each sampled seed y0 whose
/// step sequence reaches t_N contributes the labelled family
/// {(Y(t_N − t_n; y0), t_n)}_{n=0..N}, so one escape computation labels N+1
/// states. Non-escaping seeds contribute (y0, +∞). Output is ordered by seed
/// index regardless of scheduling.
std::vector<ProfilePoint> escape_profile(const RiccatiSystem& sys, const StateSampler& sampler,
                                         int n_seeds, const ProfileOptions& opts = {});

}  // namespace riccati
