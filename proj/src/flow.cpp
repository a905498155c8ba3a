#include "riccati/flow.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "riccati/detail/parallel.hpp"
#include "riccati/detail/rng.hpp"
#include "riccati/numerics.hpp"

namespace riccati {

namespace {

void check_state_dims(const RiccatiSystem& sys, const Eigen::MatrixXd& y, const char* who) {
  if (y.rows() != sys.codim() || y.cols() != sys.k()) {
    throw std::invalid_argument(std::string(who) + ": state must be (d-k) x k");
  }
  detail::require_finite(y, who);
}

Eigen::MatrixXd stack_state(const RiccatiSystem& sys, const Eigen::MatrixXd& y) {
  Eigen::MatrixXd iy(sys.dim(), sys.k());
  iy.topRows(sys.k()) = Eigen::MatrixXd::Identity(sys.k(), sys.k());
  iy.bottomRows(sys.codim()) = y;
  return iy;
}

double delta_from_norm(const RiccatiSystem& sys, double norm_iy) {
  return lambert_w0(sys.norm() / (sys.top_rows_norm() * norm_iy)) / sys.norm();
}

// Y = V·U^{-1}, via the transposed solve Uᵀ·Yᵀ = Vᵀ.
Eigen::MatrixXd retract_partition(const Eigen::MatrixXd& u, const Eigen::MatrixXd& v) {
  return u.transpose().partialPivLu().solve(v.transpose()).transpose();
}

struct March {
  enum class Status { ReachedTarget, Stalled, StepLimit };
  Status status = Status::StepLimit;
  double t = 0.0;
  Eigen::MatrixXd p;  // e^{At}·[I; Y0], d×k
  std::vector<double> steps;
  double last_delta = 0.0;
};

// Advance t_{n+1} = t_n + Δ(t_n) while maintaining p = e^{A t_n}·[I; Y0].
// Every visited interval is covered by a guaranteed-existence step, so the
// whole range [0, final t] is certified singularity-free. With
// clip_to_target the final step is truncated to stop exactly at `target`
// (still inside the last step's certificate); otherwise iterates may
// overshoot it.
March run_march(const RiccatiSystem& sys, const Eigen::MatrixXd& y0, double target,
                double stall_tol, int max_steps, bool clip_to_target, bool record_steps) {
  March m;
  m.p = stack_state(sys, y0);
  if (record_steps) m.steps.push_back(0.0);
  const Eigen::Index k = sys.k();
  for (int n = 0; n < max_steps; ++n) {
    const Eigen::MatrixXd y = retract_partition(m.p.topRows(k), m.p.bottomRows(sys.codim()));
    if (!y.allFinite()) {  // U(t_n) numerically singular: we are at the boundary
      m.status = March::Status::Stalled;
      return m;
    }
    const double delta = delta_from_norm(sys, spectral_norm(stack_state(sys, y)));
    m.last_delta = delta;
    if (delta < stall_tol) {
      m.status = March::Status::Stalled;
      return m;
    }
    if (clip_to_target && m.t + delta >= target) {
      const double dt = target - m.t;
      if (dt > 0.0) m.p = (matrix_exp(sys.a(), dt) * m.p).eval();
      m.t = target;
      m.status = March::Status::ReachedTarget;
      return m;
    }
    m.p = (matrix_exp(sys.a(), delta) * m.p).eval();
    m.t += delta;
    if (record_steps) m.steps.push_back(m.t);
    if (!clip_to_target && m.t > target) {
      m.status = March::Status::ReachedTarget;
      return m;
    }
  }
  m.status = March::Status::StepLimit;
  return m;
}

}  // namespace

FlowState flow_state(const RiccatiSystem& sys, const Eigen::MatrixXd& y0, double t) {
  check_state_dims(sys, y0, "flow_state");
  if (!std::isfinite(t)) throw std::invalid_argument("flow_state: non-finite time");
  const Eigen::MatrixXd p = matrix_exp(sys.a(), t) * stack_state(sys, y0);
  return {p.topRows(sys.k()), p.bottomRows(sys.codim()), t};
}

double delta_step(const RiccatiSystem& sys, const Eigen::MatrixXd& y) {
  check_state_dims(sys, y, "delta_step");
  if (!sys.escape_possible()) throw NoEscapeFromLinearPart();
  return delta_from_norm(sys, spectral_norm(stack_state(sys, y)));
}

std::optional<Eigen::MatrixXd> flow(const RiccatiSystem& sys, const Eigen::MatrixXd& y0, double t) {
  check_state_dims(sys, y0, "flow");
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw std::invalid_argument("flow: time must be finite and nonnegative");
  }
  if (t == 0.0) return y0;
  if (!sys.escape_possible()) {  // U(t) ≡ I: the solution is global
    const FlowState fs = flow_state(sys, y0, t);
    return retract_partition(fs.u, fs.v);
  }
  March m = run_march(sys, y0, t, 1e-13 * std::max(1.0, t), 1000000, true, false);
  if (m.status == March::Status::Stalled) return std::nullopt;
  if (m.status == March::Status::StepLimit) {
    throw std::runtime_error("flow: step limit exceeded before reaching target time");
  }
  const Eigen::MatrixXd u = m.p.topRows(sys.k());
  if (is_numerically_singular(u)) return std::nullopt;
  return retract_partition(u, m.p.bottomRows(sys.codim()));
}

EscapeResult EscapeResult::finite_at(double t, std::vector<double> steps) {
  EscapeResult r;
  r.kind = Kind::Finite;
  r.time = t;
  r.steps = std::move(steps);
  return r;
}

EscapeResult EscapeResult::not_before(double cap, std::vector<double> steps) {
  EscapeResult r;
  r.kind = Kind::NotBefore;
  r.time = cap;
  r.steps = std::move(steps);
  return r;
}

EscapeResult EscapeResult::no_escape() {
  EscapeResult r;
  r.kind = Kind::NoEscapeFromLinearPart;
  return r;
}

EscapeResult escape_time(const RiccatiSystem& sys, const Eigen::MatrixXd& y0,
                         const EscapeOptions& opts) {
  check_state_dims(sys, y0, "escape_time");
  if (!(opts.t_cap > 0.0) || !(opts.tol > 0.0) || opts.max_steps < 1) {
    throw std::invalid_argument("escape_time: t_cap, tol must be positive and max_steps >= 1");
  }
  if (!sys.escape_possible()) return EscapeResult::no_escape();

  March m = run_march(sys, y0, opts.t_cap, opts.tol, opts.max_steps, false, true);
  if (m.status == March::Status::ReachedTarget) {
    return EscapeResult::not_before(opts.t_cap, std::move(m.steps));
  }

  // The sequence stalled (or ran out of iterations) at m.t with existence
  // certified on [0, m.t]. Locate the first singular time of U ahead of m.t by
  // expanding a bracket and bisecting on det U ≤ 0 or near-singularity.
  const Eigen::Index k = sys.k();
  const Eigen::MatrixXd p_stall = m.p;
  auto u_at = [&](double dt) {
    return Eigen::MatrixXd((matrix_exp(sys.a(), dt) * p_stall).topRows(k));
  };
  auto crossed = [&](const Eigen::MatrixXd& u) {
    return u.determinant() <= 0.0 || is_numerically_singular(u);
  };

  const double margin = std::max(1.0, m.t);
  double lo = 0.0;
  double hi = std::min(margin, std::max(8.0 * opts.tol, 4.0 * m.last_delta));
  bool found = false;
  for (;;) {
    if (crossed(u_at(hi))) {
      found = true;
      break;
    }
    if (hi >= margin) break;
    lo = hi;
    hi = std::min(margin, 2.0 * hi);
  }
  if (!found) {
    if (m.status == March::Status::StepLimit) {
      // Iteration budget exhausted while still advancing: existence is
      // certified up to m.t and nothing further can be claimed.
      return EscapeResult::not_before(m.t, std::move(m.steps));
    }
    // Stalled with no reachable singularity in the search window; report the
    // stall point, the limit of the step sequence.
    return EscapeResult::finite_at(m.t, std::move(m.steps));
  }
  while (hi - lo > opts.tol) {
    const double mid = 0.5 * (lo + hi);
    if (crossed(u_at(mid))) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return EscapeResult::finite_at(m.t + 0.5 * (lo + hi), std::move(m.steps));
}

StateSampler box_sampler(Eigen::Index rows, Eigen::Index cols, double low, double high) {
  if (rows < 1 || cols < 1 || !(low <= high)) {
    throw std::invalid_argument("box_sampler: need rows, cols >= 1 and low <= high");
  }
  return [rows, cols, low, high](std::mt19937_64& rng) {
    Eigen::MatrixXd y(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
      for (Eigen::Index i = 0; i < rows; ++i) {
        y(i, j) = low + (high - low) * detail::uniform_draw(rng);
      }
    }
    return y;
  };
}

StateSampler angle_sampler() {
  return [](std::mt19937_64& rng) {
    const double theta = (detail::uniform_draw(rng) - 0.5) * std::numbers::pi;
    Eigen::MatrixXd y(1, 1);
    y(0, 0) = std::tan(theta);
    return y;
  };
}

std::vector<ProfilePoint> escape_profile(const RiccatiSystem& sys, const StateSampler& sampler,
                                         int n_seeds, const ProfileOptions& opts) {
  if (n_seeds < 0) throw std::invalid_argument("escape_profile: n_seeds must be >= 0");
  if (opts.n_steps < 1) throw std::invalid_argument("escape_profile: n_steps must be >= 1");

  std::vector<std::vector<ProfilePoint>> per_seed(static_cast<std::size_t>(n_seeds));
  detail::parallel_for(n_seeds, opts.threads, [&](std::int64_t i) {
    std::mt19937_64 rng(detail::mix_seed(opts.seed, static_cast<std::uint64_t>(i)));
    Eigen::MatrixXd y0 = sampler(rng);
    const EscapeResult r =
        escape_time(sys, y0, EscapeOptions{opts.n_steps, opts.t_cap, opts.tol});
    auto& out = per_seed[static_cast<std::size_t>(i)];
    if (!r.finite()) {
      out.push_back({std::move(y0), std::numeric_limits<double>::infinity()});
      return;
    }
    const double t_last = r.steps.back();
    out.reserve(r.steps.size());
    for (const double tn : r.steps) {
      auto state = flow(sys, y0, t_last - tn);
      if (!state) continue;  // grazing the boundary numerically; drop the point
      out.push_back({std::move(*state), tn});
    }
  });

  std::vector<ProfilePoint> result;
  for (auto& chunk : per_seed) {
    for (auto& pt : chunk) result.push_back(std::move(pt));
  }
  return result;
}

}  // namespace riccati
