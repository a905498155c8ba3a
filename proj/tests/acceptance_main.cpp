// Acceptance suite: numbered end-to-end criteria, one pass/fail line each.
// Every tolerance is pinned here; the process exits nonzero if any criterion
// fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "oracles.hpp"
#include "riccati/flow.hpp"
#include "riccati/grassmann.hpp"
#include "riccati/mean_escape.hpp"
#include "riccati/monte_carlo.hpp"
#include "riccati/numerics.hpp"

using namespace riccati;
using namespace riccati::testing;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool cond, const std::string& message) {
    if (!cond && pass) {
      pass = false;
      detail = message;
    }
  }
};

std::string fmt(double x) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

Eigen::MatrixXd random_matrix(std::mt19937& rng, Eigen::Index rows, Eigen::Index cols,
                              double scale) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
  }
  return m;
}

// --------------------------------------------------------------------------
// 1. Scalar quadratic escape time and the raw step sequence.

Outcome criterion_scalar_escape() {
  Outcome o;
  const auto t_start = std::chrono::steady_clock::now();
  const auto sys = scalar_quadratic_system();
  EscapeOptions opts;
  opts.tol = 1e-12;
  const EscapeResult r = escape_time(sys, scalar_state(1.0), opts);
  const double expected = 0.5 * std::log(3.0);
  o.require(r.finite(), "escape not detected");
  if (r.finite()) {
    o.require(std::abs(r.time - expected) < 1e-5,
              "escape time " + fmt(r.time) + " vs (log 3)/2 = " + fmt(expected));
    o.require(r.steps.size() > 20, "step sequence shorter than 21 entries");
    if (r.steps.size() > 20) {
      o.require(std::abs(r.steps[20] - 0.549306) < 5e-7,
                "t_20 = " + fmt(r.steps[20]) + " does not round to 0.549306");
    }
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  o.require(elapsed < 1.0, "runtime " + fmt(elapsed) + " s exceeds 1 s");
  if (o.pass) o.detail = "t = " + fmt(r.time) + ", t_20 = " + fmt(r.steps[20]);
  return o;
}

// --------------------------------------------------------------------------
// 2. Rotation escape law over speeds and angles.

Outcome criterion_rotation_law() {
  Outcome o;
  const auto t_start = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (const double omega : {1.0, 10.0, 100.0}) {
    const auto sys = rotation_system(omega);
    for (int i = 0; i < 100; ++i) {
      const double theta = -kPi / 2.0 + (i + 0.5) * kPi / 100.0;
      EscapeOptions opts;
      opts.tol = 1e-12;
      const EscapeResult r = escape_time(sys, scalar_state(std::tan(theta)), opts);
      if (!r.finite()) {
        o.require(false, "no escape at omega = " + fmt(omega) + ", theta = " + fmt(theta));
        continue;
      }
      const double expected = (kPi / 2.0 - theta) / omega;
      worst = std::max(worst, std::abs(r.time - expected) / expected);
    }
  }
  o.require(worst < 1e-6, "worst relative error " + fmt(worst));
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  o.require(elapsed < 10.0, "runtime " + fmt(elapsed) + " s exceeds 10 s");
  if (o.pass) o.detail = "worst relative error " + fmt(worst);
  return o;
}

// --------------------------------------------------------------------------
// 3. Series versus Monte Carlo cross-validation.

Outcome criterion_cross_validation() {
  Outcome o;
  const auto t_start = std::chrono::steady_clock::now();
  const auto sw = counter_rotation_switch(1.0, 1.0, 1.0);
  ChartGrid grid = grid_from_spacing(0.005);
  const BoundedCheck check = check_bounded(sw, grid, 50.0, 1e-8, 0);
  o.require(check.ok, "escape times not bounded on the grid");
  SeriesOptions series;
  series.max_terms = 21;
  series.threads = 0;
  solve_power_series(sw, grid, series);

  EstimateOptions mc;
  mc.threads = 0;
  double worst_sigma = 0.0;
  for (const double theta : {-1.2, -0.6, 0.0, 0.6, 1.2}) {
    const double series_value = interpolate_on_grid(grid.angles, grid.mean_a, theta);
    const EstimatorReport rep =
        estimate_mean_escape(sw, scalar_state(std::tan(theta)), Mode::A, 100000, 12345, mc);
    const double diff = std::abs(rep.mean - series_value);
    worst_sigma = std::max(worst_sigma, diff / rep.std_error);
    o.require(rep.capped_fraction < 1e-3, "capped fraction " + fmt(rep.capped_fraction));
    o.require(diff < 3.0 * rep.std_error,
              "theta = " + fmt(theta) + ": |" + fmt(rep.mean) + " - " + fmt(series_value) +
                  "| = " + fmt(diff) + " exceeds 3se = " + fmt(3.0 * rep.std_error));
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  o.require(elapsed < 120.0, "runtime " + fmt(elapsed) + " s exceeds 2 min");
  if (o.pass) {
    o.detail = "worst deviation " + fmt(worst_sigma) + " sigma, " + fmt(elapsed) + " s";
  }
  return o;
}

// --------------------------------------------------------------------------
// 4. Slow switching approaches the deterministic escape time.

Outcome criterion_small_lambda() {
  Outcome o;
  const auto sw = counter_rotation_switch(1.0, 1.0, 0.01);
  ChartGrid grid = grid_from_spacing(0.005);
  o.require(check_bounded(sw, grid, 50.0, 1e-8, 0).ok, "escape times not bounded");
  SeriesOptions series;
  series.max_terms = 21;
  series.threads = 0;
  solve_power_series(sw, grid, series);
  double sup_rel = 0.0;
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const double theta = grid.angles[static_cast<std::size_t>(i)];
    if (std::abs(theta) > 1.4) continue;
    const double deterministic = (kPi / 2.0 - theta);
    sup_rel = std::max(sup_rel, std::abs(grid.mean_a(i) - deterministic) / deterministic);
  }
  o.require(sup_rel < 0.05, "sup relative gap " + fmt(sup_rel));
  if (o.pass) o.detail = "sup relative gap " + fmt(sup_rel);
  return o;
}

// --------------------------------------------------------------------------
// 5. Mean escape time decreases in the first mode's speed.

Outcome criterion_monotonicity() {
  Outcome o;
  std::vector<Eigen::VectorXd> solutions;
  for (const double omega : {1.0, 10.0, 100.0}) {
    const auto sw = counter_rotation_switch(omega, 1.0, 1.0);
    ChartGrid grid = grid_from_spacing(0.005);
    o.require(check_bounded(sw, grid, 50.0, 1e-8, 0).ok,
              "escape times not bounded at omega = " + fmt(omega));
    SeriesOptions series;
    series.max_terms = 21;
    series.threads = 0;
    solve_power_series(sw, grid, series);
    solutions.push_back(grid.mean_a);
  }
  double worst_violation = 0.0;
  for (std::size_t pair = 0; pair + 1 < solutions.size(); ++pair) {
    worst_violation =
        std::max(worst_violation, (solutions[pair + 1] - solutions[pair]).maxCoeff());
  }
  o.require(worst_violation <= 1e-9, "violation " + fmt(worst_violation));
  if (o.pass) o.detail = "largest increase across speeds " + fmt(worst_violation);
  return o;
}

// --------------------------------------------------------------------------
// 6. Contraction: operator row sums and series term decay.

Outcome criterion_contraction() {
  Outcome o;
  const auto sw = counter_rotation_switch(1.0, 1.0, 1.0);

  ChartGrid net = grid_from_net(build_net(0.01));
  o.require(check_bounded(sw, net, 50.0, 1e-8, 0).ok, "escape times not bounded on the net");
  const double f_t0_net = sw.law().cdf(std::max(net.escape_a.maxCoeff(), net.escape_b.maxCoeff()));
  const TransferMatrices tm = build_transfer_matrices(sw, net, 0.01);
  const double worst_row =
      std::max(tm.na.rowwise().sum().maxCoeff(), tm.nb.rowwise().sum().maxCoeff());
  o.require(worst_row <= f_t0_net + 1e-8,
            "row sum " + fmt(worst_row) + " exceeds F(t0) = " + fmt(f_t0_net));

  ChartGrid grid = grid_from_spacing(0.005);
  o.require(check_bounded(sw, grid, 50.0, 1e-8, 0).ok, "escape times not bounded on the grid");
  const double f_t0 = sw.law().cdf(std::max(grid.escape_a.maxCoeff(), grid.escape_b.maxCoeff()));
  const Eigen::Index n = grid.size();
  Eigen::VectorXd term_a(n), term_b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    term_a(i) = g_value(grid.escape_a(i), sw.law());
    term_b(i) = g_value(grid.escape_b(i), sw.law());
  }
  double prev = std::max(term_a.lpNorm<Eigen::Infinity>(), term_b.lpNorm<Eigen::Infinity>());
  double worst_ratio = 0.0;
  for (int k = 1; k < 21; ++k) {
    const Eigen::VectorXd next_a = apply_m(term_b, sw.sys_a(), grid.escape_a, sw.law(), grid.angles, 0);
    const Eigen::VectorXd next_b = apply_m(term_a, sw.sys_b(), grid.escape_b, sw.law(), grid.angles, 0);
    term_a = next_a;
    term_b = next_b;
    const double cur = std::max(term_a.lpNorm<Eigen::Infinity>(), term_b.lpNorm<Eigen::Infinity>());
    worst_ratio = std::max(worst_ratio, cur / prev);
    prev = cur;
  }
  o.require(worst_ratio <= f_t0 + 0.02,
            "term ratio " + fmt(worst_ratio) + " exceeds F(t0) + 0.02 = " + fmt(f_t0 + 0.02));
  if (o.pass) {
    o.detail = "max row sum " + fmt(worst_row) + " <= F(t0) = " + fmt(f_t0_net) +
               ", max term ratio " + fmt(worst_ratio);
  }
  return o;
}

// --------------------------------------------------------------------------
// 7. Transfer-matrix solve versus the power series.

Outcome criterion_transfer_vs_series() {
  Outcome o;
  const auto sw = counter_rotation_switch(1.0, 1.0, 1.0);
  ChartGrid grid = grid_from_spacing(0.005);
  o.require(check_bounded(sw, grid, 50.0, 1e-8, 0).ok, "escape times not bounded");
  SeriesOptions series;
  series.max_terms = 21;
  series.threads = 0;
  solve_power_series(sw, grid, series);

  ChartGrid net = grid_from_net(build_net(0.01));
  o.require(check_bounded(sw, net, 50.0, 1e-8, 0).ok, "escape times not bounded on the net");
  const TransferMatrices tm = build_transfer_matrices(sw, net, 0.01);
  const auto [ta, tb] = solve_transfer(tm);

  double sup = 0.0;
  for (Eigen::Index i = 0; i < net.size(); ++i) {
    const double theta = net.angles[static_cast<std::size_t>(i)];
    sup = std::max(sup, std::abs(ta(i) - interpolate_on_grid(grid.angles, grid.mean_a, theta)));
    sup = std::max(sup, std::abs(tb(i) - interpolate_on_grid(grid.angles, grid.mean_b, theta)));
  }
  o.require(sup <= 0.05, "sup discrepancy " + fmt(sup));
  if (o.pass) o.detail = "sup discrepancy " + fmt(sup);
  return o;
}

// --------------------------------------------------------------------------
// 8. Property suites.

Outcome criterion_properties() {
  Outcome o;

  {  // Exponential difference bound on 10^3 random samples.
    std::mt19937 rng(101);
    std::uniform_real_distribution<double> time_dist(0.05, 2.0);
    std::uniform_int_distribution<int> dim_dist(2, 5);
    std::bernoulli_distribution flip(0.5);
    for (int rep = 0; rep < 1000; ++rep) {
      const int d = dim_dist(rng);
      const Eigen::MatrixXd m = random_matrix(rng, d, d, 2.0);
      const Eigen::MatrixXd a = random_matrix(rng, d, d, 2.0);
      const double t = (flip(rng) ? 1.0 : -1.0) * time_dist(rng);
      const double lhs = spectral_norm(m * (matrix_exp(a, t) - Eigen::MatrixXd::Identity(d, d)));
      const double rhs = spectral_norm(m * a) * std::abs(t) * std::exp(spectral_norm(a) * std::abs(t));
      if (!(lhs < rhs)) {
        o.require(false, "exponential difference bound violated");
        break;
      }
    }
  }

  {  // Escape-time shift identity on 10^2 random trajectories.
    std::mt19937 rng(103);
    int verified = 0;
    for (int rep = 0; rep < 3000 && verified < 100; ++rep) {
      const Eigen::MatrixXd a = random_matrix(rng, 3, 3, 1.5);
      const RiccatiSystem sys(a, 1);
      if (!sys.escape_possible()) continue;
      const Eigen::MatrixXd y0 = random_matrix(rng, 2, 1, 2.0);
      const EscapeResult base = escape_time(sys, y0);
      if (!base.finite() || base.time < 0.05) continue;
      const double t = 0.4 * base.time;
      const auto mid = flow(sys, y0, t);
      if (!mid) continue;
      const EscapeResult shifted = escape_time(sys, *mid);
      if (!shifted.finite()) continue;
      if (std::abs(shifted.time - (base.time - t)) >= 1e-6) {
        o.require(false, "shift identity violated by " + fmt(std::abs(shifted.time - (base.time - t))));
        break;
      }
      ++verified;
    }
    o.require(verified >= 100, "only " + std::to_string(verified) + " shift samples verified");
  }

  {  // Flow agrees with adaptive RK4 away from escape.
    const auto check_rk4 = [&o](const RiccatiSystem& sys, const Eigen::MatrixXd& y0, double t) {
      const FlowState fs = flow_state(sys, y0, t);
      if (min_singular_value(fs.u) <= 0.1) return;
      const auto y = flow(sys, y0, t);
      o.require(y.has_value(), "flow vanished where RK4 integrates");
      if (!y) return;
      const Eigen::MatrixXd expected = rk4_integrate(sys, y0, t, 1e-9);
      o.require((*y - expected).cwiseAbs().maxCoeff() < 1e-6, "flow vs RK4 gap at t = " + fmt(t));
    };
    check_rk4(scalar_quadratic_system(), scalar_state(1.0), 0.3);
    check_rk4(rotation_system(1.0), scalar_state(0.0), 1.0);
    Eigen::MatrixXd y0(2, 1);
    y0 << -0.5, -0.5;
    check_rk4(three_dim_system(), y0, 0.5);
    std::mt19937 rng(107);
    for (int rep = 0; rep < 20; ++rep) {
      const Eigen::MatrixXd a = random_matrix(rng, 3, 3, 1.0);
      check_rk4(RiccatiSystem(a, 1), random_matrix(rng, 2, 1, 1.0), 0.25);
    }
  }

  {  // Chart round trip to 1e-10.
    std::mt19937 rng(109);
    for (int rep = 0; rep < 400; ++rep) {
      const Eigen::Index k = 1 + rep % 2;
      const Eigen::Index codim = 1 + rep % 3;
      const Eigen::MatrixXd y = random_matrix(rng, codim, k, 5.0);
      const auto back = chart_retract(chart_embed(y));
      if (!back || (*back - y).cwiseAbs().maxCoeff() >= 1e-10) {
        o.require(false, "chart round trip failed");
        break;
      }
    }
  }

  {  // Lambert W inverse identity to 1e-10 relative.
    std::mt19937 rng(113);
    std::uniform_real_distribution<double> dist(0.0, 50.0);
    for (int rep = 0; rep < 10000; ++rep) {
      const double x = dist(rng);
      const double w = lambert_w0(x);
      if (std::abs(w * std::exp(w) - x) > 1e-10 * std::max(x, 1.0)) {
        o.require(false, "Lambert W identity violated at x = " + fmt(x));
        break;
      }
    }
  }

  {  // g closed form versus quadrature of its defining expression.
    std::mt19937 rng(127);
    std::uniform_real_distribution<double> t_dist(0.0, 6.0);
    std::uniform_real_distribution<double> l_dist(0.1, 5.0);
    for (int rep = 0; rep < 50; ++rep) {
      const double t_escape = t_dist(rng);
      const PoissonLaw law(l_dist(rng));
      const double direct = adaptive_simpson([&](double tau) { return tau * law.density(tau); },
                                             0.0, t_escape, 1e-14) +
                            t_escape * (1.0 - law.cdf(t_escape));
      if (std::abs(g_value(t_escape, law) - direct) > 1e-10) {
        o.require(false, "g closed form deviates from quadrature");
        break;
      }
    }
  }

  {  // Net coverage at both radii.
    std::mt19937 rng(131);
    std::uniform_real_distribution<double> angle(-kPi / 2.0, kPi / 2.0);
    for (const double eps : {0.1, 0.01}) {
      const auto net = build_net(eps);
      double worst = 0.0;
      for (int rep = 0; rep < 10000; ++rep) {
        const ProjectiveAngle q{angle(rng)};
        double best = 1.0;
        for (const auto& p : net) best = std::min(best, angle_distance(q, p));
        worst = std::max(worst, best);
      }
      o.require(worst < eps, "net coverage " + fmt(worst) + " at eps = " + fmt(eps));
    }
  }

  if (o.pass) o.detail = "all property suites held";
  return o;
}

// --------------------------------------------------------------------------
// 9. Non-escape handling and the profile plateau.

Outcome criterion_non_escape() {
  Outcome o;
  const auto sys = scalar_quadratic_system();
  const EscapeResult r = escape_time(sys, scalar_state(-1.0));
  o.require(r.kind == EscapeResult::Kind::NotBefore, "outcome is not NotBefore");
  o.require(r.time == 50.0, "cap reported as " + fmt(r.time));

  ProfileOptions opts;
  opts.seed = 20240913;
  opts.threads = 0;
  const auto profile = escape_profile(sys, box_sampler(1, 1, -3.0, 3.0), 60, opts);
  int plateau = 0;
  bool plateau_clean = true;
  int finite_side = 0;
  for (const auto& pt : profile) {
    if (pt.state(0, 0) < -1e-9) {
      ++plateau;
      // Arc-tangent rescaling must sit exactly at pi/2 on the non-escaping side.
      plateau_clean = plateau_clean && std::atan(pt.escape_time) == kPi / 2.0;
    } else if (std::isfinite(pt.escape_time)) {
      ++finite_side;
    }
  }
  o.require(plateau >= 10, "only " + std::to_string(plateau) + " plateau samples");
  o.require(plateau_clean, "a non-escaping state was labelled with a finite time");
  o.require(finite_side >= 10, "too few finite escape labels on the positive side");
  if (o.pass) {
    o.detail = "NotBefore(50), " + std::to_string(plateau) + " plateau points at pi/2";
  }
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"scalar quadratic escape time and step sequence", criterion_scalar_escape},
      {"rotation escape law across speeds", criterion_rotation_law},
      {"mean escape: series vs Monte Carlo", criterion_cross_validation},
      {"slow switching matches deterministic escape", criterion_small_lambda},
      {"mean escape decreases in rotation speed", criterion_monotonicity},
      {"operator contraction and term decay", criterion_contraction},
      {"transfer solve vs power series", criterion_transfer_vs_series},
      {"property suites", criterion_properties},
      {"non-escape handling and profile plateau", criterion_non_escape},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %zu. %s — %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), o.detail.c_str(), elapsed);
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
  return failures;
}
