#include "riccati/monte_carlo.hpp"

#include <cmath>
#include <stdexcept>

#include "riccati/detail/parallel.hpp"
#include "riccati/detail/rng.hpp"
#include "riccati/flow.hpp"

namespace riccati {

namespace {

// Index-ordered pairwise sum; reproducible independently of thread count.
double pairwise_sum(const std::vector<double>& xs, std::size_t lo, std::size_t hi) {
  if (hi - lo <= 8) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += xs[i];
    return s;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  return pairwise_sum(xs, lo, mid) + pairwise_sum(xs, mid, hi);
}

}  // namespace

EscapeSample simulate_escape(const SwitchedSystem& sw, const Eigen::MatrixXd& y0, Mode z0,
                             std::uint64_t seed, const SimulateOptions& opts) {
  if (!(opts.t_cap > 0.0)) throw std::invalid_argument("simulate_escape: t_cap must be positive");
  std::mt19937_64 rng(detail::mix_seed(seed, 0));

  EscapeSample sample;
  sample.modes.push_back(z0);
  Mode mode = z0;
  Eigen::MatrixXd y = y0;
  double total = 0.0;

  for (;;) {
    const RiccatiSystem& sys = sw.sys(mode);
    EscapeOptions eo;
    eo.t_cap = opts.t_cap - total;
    eo.tol = opts.tol;
    const double t_escape = escape_time(sys, y, eo).time_or_infinity();
    const double tau = detail::exponential_draw(rng, sw.law().lambda);

    if (tau >= t_escape) {
      sample.escape_time = total + t_escape;
      sample.capped = false;
      return sample;
    }
    if (total + tau >= opts.t_cap) {
      sample.escape_time = opts.t_cap;
      sample.capped = true;
      return sample;
    }
    auto next = flow(sys, y, tau);
    if (!next) {
      // tau landed inside the solver's terminal bracket: the trajectory
      // escaped a hair before the drawn jump.
      sample.escape_time = total + std::min(tau, t_escape);
      sample.capped = false;
      return sample;
    }
    y = std::move(*next);
    total += tau;
    mode = toggled(mode);
    sample.jump_times.push_back(total);
    sample.modes.push_back(mode);
  }
}

EstimatorReport estimate_mean_escape(const SwitchedSystem& sw, const Eigen::MatrixXd& y0, Mode z0,
                                     long n_trials, std::uint64_t seed,
                                     const EstimateOptions& opts) {
  if (n_trials < 1) throw std::invalid_argument("estimate_mean_escape: need n_trials >= 1");

  std::vector<double> values(static_cast<std::size_t>(n_trials));
  std::vector<char> capped(static_cast<std::size_t>(n_trials));
  SimulateOptions sim{opts.t_cap, opts.tol};
  detail::parallel_for(n_trials, opts.threads, [&](std::int64_t i) {
    const EscapeSample s =
        simulate_escape(sw, y0, z0, detail::mix_seed(seed, static_cast<std::uint64_t>(i)), sim);
    values[static_cast<std::size_t>(i)] = s.escape_time;
    capped[static_cast<std::size_t>(i)] = s.capped ? 1 : 0;
  });

  std::vector<double> kept;
  kept.reserve(values.size());
  long n_capped = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (capped[i]) {
      ++n_capped;
    } else {
      kept.push_back(values[i]);
    }
  }

  EstimatorReport report;
  report.n = n_trials;
  report.capped_fraction = static_cast<double>(n_capped) / static_cast<double>(n_trials);
  if (kept.empty()) return report;

  const auto m = kept.size();
  report.mean = pairwise_sum(kept, 0, m) / static_cast<double>(m);
  if (m > 1) {
    std::vector<double> sq(m);
    for (std::size_t i = 0; i < m; ++i) {
      const double d = kept[i] - report.mean;
      sq[i] = d * d;
    }
    const double var = pairwise_sum(sq, 0, m) / static_cast<double>(m - 1);
    report.std_error = std::sqrt(var / static_cast<double>(m));
  }
  return report;
}

}  // namespace riccati
