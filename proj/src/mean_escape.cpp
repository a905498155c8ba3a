#include "riccati/mean_escape.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "riccati/detail/parallel.hpp"
#include "riccati/numerics.hpp"

namespace riccati {

namespace {

constexpr double kPi = std::numbers::pi;

void require_projective_line(const SwitchedSystem& sw, const char* who) {
  if (sw.dim() != 2 || sw.k() != 1) {
    throw std::invalid_argument(std::string(who) + ": grid solvers cover d = 2, k = 1 only");
  }
}

void require_escape_times(const ChartGrid& grid, const char* who) {
  const Eigen::Index n = grid.size();
  if (grid.escape_a.size() != n || grid.escape_b.size() != n) {
    throw std::invalid_argument(std::string(who) +
                                ": grid carries no escape times; run check_bounded first");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(grid.escape_a(i)) || !std::isfinite(grid.escape_b(i))) {
      throw AssumptionViolation(std::string(who) + ": non-finite escape time at grid index " +
                                std::to_string(i) +
                                "; escape times must be uniformly bounded");
    }
  }
}

Eigen::MatrixXd scalar_state(double y) {
  Eigen::MatrixXd m(1, 1);
  m(0, 0) = y;
  return m;
}

// Angle of the flowed direction (c, s) = e^{Aτ}·(cos θ, sin θ) for τ up to the
// escape time. On that range c = U(τ) ≥ 0, so the angle lives in [−π/2, π/2];
// roundoff can push c of a boundary-grazing state slightly negative, which
// would wrap the angle to the far side of the (discontinuous) grid function.
// Clamping keeps the one-sided limit sign(s)·π/2 that the integral needs. A
// c that is negative beyond roundoff scale would mean a node past the escape
// boundary, which the existence guarantee rules out below the escape time.
double angle_from_vector(double c, double s) {
  if (c < -1e-6 * std::hypot(c, s)) {
    throw std::logic_error("mean-escape quadrature: node past the escape boundary");
  }
  return std::atan2(s, std::max(c, 0.0));
}

int simpson_intervals(double lambda, double t_limit) {
  const double scaled = 16.0 * lambda * t_limit;
  int n = std::max(64, 2 * static_cast<int>(std::ceil(scaled / 2.0)));
  if (n % 2 != 0) ++n;
  return n;
}

}  // namespace

ChartGrid grid_from_spacing(double spacing) {
  if (!(spacing > 0.0) || spacing >= kPi / 2.0) {
    throw std::invalid_argument("grid_from_spacing: spacing must lie in (0, pi/2)");
  }
  auto half = static_cast<long>(std::floor((kPi / 2.0) / spacing));
  if (static_cast<double>(half) * spacing >= kPi / 2.0) --half;
  ChartGrid grid;
  grid.angles.reserve(static_cast<std::size_t>(2 * half + 1));
  for (long j = -half; j <= half; ++j) {
    grid.angles.push_back(static_cast<double>(j) * spacing);
  }
  return grid;
}

ChartGrid grid_from_net(const std::vector<ProjectiveAngle>& net) {
  ChartGrid grid;
  grid.angles.reserve(net.size());
  for (const auto& a : net) grid.angles.push_back(a.theta);
  std::sort(grid.angles.begin(), grid.angles.end());
  return grid;
}

BoundedCheck check_bounded(const SwitchedSystem& sw, ChartGrid& grid, double t_cap, double tol,
                           int threads) {
  require_projective_line(sw, "check_bounded");
  const Eigen::Index n = grid.size();
  grid.escape_a.resize(n);
  grid.escape_b.resize(n);

  EscapeOptions opts;
  opts.t_cap = t_cap;
  opts.tol = tol;
  detail::parallel_for(n, threads, [&](std::int64_t i) {
    const Eigen::MatrixXd y0 = scalar_state(std::tan(grid.angles[static_cast<std::size_t>(i)]));
    grid.escape_a(i) = escape_time(sw.sys_a(), y0, opts).time_or_infinity();
    grid.escape_b(i) = escape_time(sw.sys_b(), y0, opts).time_or_infinity();
  });

  BoundedCheck check;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ta = grid.escape_a(i);
    const double tb = grid.escape_b(i);
    if (std::isfinite(ta) && std::isfinite(tb)) {
      check.t0 = std::max(check.t0, std::max(ta, tb));
    } else {
      check.offenders.push_back(i);
    }
  }
  check.ok = check.offenders.empty();
  return check;
}

double g_value(double t_escape, const PoissonLaw& law) {
  if (std::isnan(t_escape) || t_escape < 0.0) {
    throw std::invalid_argument("g_value: escape time must be nonnegative");
  }
  return -std::expm1(-law.lambda * t_escape) / law.lambda;
}

double interpolate_on_grid(const std::vector<double>& angles, const Eigen::VectorXd& values,
                           double theta) {
  if (angles.empty() || values.size() != static_cast<Eigen::Index>(angles.size())) {
    throw std::invalid_argument("interpolate_on_grid: need matching nonempty grid and values");
  }
  const auto n = static_cast<Eigen::Index>(angles.size());
  if (n == 1) return values(0);
  // Out-of-range queries extend the end segments linearly; flowed angles only
  // overshoot the grid by the sub-spacing gap to the chart boundary.
  Eigen::Index hi;
  if (theta <= angles.front()) {
    hi = 1;
  } else if (theta >= angles.back()) {
    hi = n - 1;
  } else {
    hi = static_cast<Eigen::Index>(std::upper_bound(angles.begin(), angles.end(), theta) -
                                   angles.begin());
  }
  const Eigen::Index lo = hi - 1;
  const double span = angles[static_cast<std::size_t>(hi)] - angles[static_cast<std::size_t>(lo)];
  const double w = span > 0.0 ? (theta - angles[static_cast<std::size_t>(lo)]) / span : 0.0;
  return (1.0 - w) * values(lo) + w * values(hi);
}

Eigen::VectorXd apply_m(const Eigen::VectorXd& t_values, const RiccatiSystem& sys,
                        const Eigen::VectorXd& escape_times, const PoissonLaw& law,
                        const std::vector<double>& angles, int threads) {
  if (sys.dim() != 2 || sys.k() != 1) {
    throw std::invalid_argument("apply_m: grid solvers cover d = 2, k = 1 only");
  }
  const auto n_points = static_cast<Eigen::Index>(angles.size());
  if (t_values.size() != n_points || escape_times.size() != n_points) {
    throw std::invalid_argument("apply_m: grid function sizes must match the grid");
  }

  Eigen::VectorXd out(n_points);
  detail::parallel_for(n_points, threads, [&](std::int64_t i) {
    const double t_limit = escape_times(i);
    if (!std::isfinite(t_limit)) {
      throw AssumptionViolation("apply_m: non-finite escape time on the grid");
    }
    if (t_limit <= 0.0) {
      out(i) = 0.0;
      return;
    }
    const int n_int = simpson_intervals(law.lambda, t_limit);
    const double h = t_limit / n_int;
    const Eigen::Matrix2d step = matrix_exp(sys.a(), h);
    const double theta0 = angles[static_cast<std::size_t>(i)];
    Eigen::Vector2d dir(std::cos(theta0), std::sin(theta0));

    double acc = 0.0;
    for (int j = 0; j <= n_int; ++j) {
      const double tau = j * h;
      const double theta = angle_from_vector(dir(0), dir(1));
      const double integrand = law.density(tau) * interpolate_on_grid(angles, t_values, theta);
      const double weight = (j == 0 || j == n_int) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
      acc += weight * integrand;
      dir = step * dir;
    }
    out(i) = acc * h / 3.0;
  });
  return out;
}

void solve_power_series(const SwitchedSystem& sw, ChartGrid& grid, const SeriesOptions& opts) {
  require_projective_line(sw, "solve_power_series");
  require_escape_times(grid, "solve_power_series");
  if (opts.max_terms < 1) {
    throw std::invalid_argument("solve_power_series: max_terms must be >= 1");
  }

  const Eigen::Index n = grid.size();
  Eigen::VectorXd term_a(n), term_b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    term_a(i) = g_value(grid.escape_a(i), sw.law());
    term_b(i) = g_value(grid.escape_b(i), sw.law());
  }
  Eigen::VectorXd sum_a = term_a;
  Eigen::VectorXd sum_b = term_b;
  double residual = std::max(term_a.lpNorm<Eigen::Infinity>(), term_b.lpNorm<Eigen::Infinity>());

  for (int k = 1; k < opts.max_terms; ++k) {
    Eigen::VectorXd next_a =
        apply_m(term_b, sw.sys_a(), grid.escape_a, sw.law(), grid.angles, opts.threads);
    Eigen::VectorXd next_b =
        apply_m(term_a, sw.sys_b(), grid.escape_b, sw.law(), grid.angles, opts.threads);
    term_a = std::move(next_a);
    term_b = std::move(next_b);
    sum_a += term_a;
    sum_b += term_b;
    residual = std::max(term_a.lpNorm<Eigen::Infinity>(), term_b.lpNorm<Eigen::Infinity>());
    if (opts.tol > 0.0 && residual < opts.tol) break;
  }

  grid.mean_a = std::move(sum_a);
  grid.mean_b = std::move(sum_b);
  grid.residual = residual;
}

namespace {

// Index of the grid angle nearest to theta in the |sin Δθ| metric; the
// projective wrap makes the two grid ends candidates for angles near ±π/2.
Eigen::Index nearest_grid_index(const std::vector<double>& angles, double theta) {
  const auto it = std::lower_bound(angles.begin(), angles.end(), theta);
  const auto last = static_cast<Eigen::Index>(angles.size()) - 1;
  Eigen::Index best = -1;
  double best_dist = std::numeric_limits<double>::infinity();
  const Eigen::Index around = static_cast<Eigen::Index>(it - angles.begin());
  for (const Eigen::Index cand : {around - 1, around, Eigen::Index(0), last}) {
    if (cand < 0 || cand > last) continue;
    const double dist =
        std::abs(std::sin(theta - angles[static_cast<std::size_t>(cand)]));
    if (dist < best_dist) {
      best_dist = dist;
      best = cand;
    }
  }
  return best;
}

// One mode's discretized jump operator and source vector.
void fill_transfer(const RiccatiSystem& sys, const PoissonLaw& law, const ChartGrid& grid,
                   const Eigen::VectorXd& escape_times, double h, Eigen::MatrixXd& n_mat,
                   Eigen::VectorXd& g_vec) {
  const Eigen::Index n_points = grid.size();
  n_mat = Eigen::MatrixXd::Zero(n_points, n_points);
  g_vec.resize(n_points);
  const Eigen::Matrix2d step = matrix_exp(sys.a(), h);

  for (Eigen::Index l = 0; l < n_points; ++l) {
    const double t_esc = escape_times(l);
    g_vec(l) = g_value(t_esc, law);
    const double theta0 = grid.angles[static_cast<std::size_t>(l)];
    Eigen::Vector2d dir(std::cos(theta0), std::sin(theta0));
    for (int cell = 0; cell * h < t_esc; ++cell) {
      const double lo = cell * h;
      const double hi = std::min((cell + 1) * h, t_esc);
      const double xi = law.cdf(hi) - law.cdf(lo);
      const double theta = angle_from_vector(dir(0), dir(1));
      n_mat(l, nearest_grid_index(grid.angles, theta)) += xi;
      dir = step * dir;
    }
  }
}

}  // namespace

TransferMatrices build_transfer_matrices(const SwitchedSystem& sw, const ChartGrid& grid,
                                         double h) {
  require_projective_line(sw, "build_transfer_matrices");
  require_escape_times(grid, "build_transfer_matrices");
  if (!(h > 0.0)) throw std::invalid_argument("build_transfer_matrices: h must be positive");
  if (grid.size() == 0) throw std::invalid_argument("build_transfer_matrices: empty grid");

  TransferMatrices tm;
  fill_transfer(sw.sys_a(), sw.law(), grid, grid.escape_a, h, tm.na, tm.ga);
  fill_transfer(sw.sys_b(), sw.law(), grid, grid.escape_b, h, tm.nb, tm.gb);

  const double max_row_sum =
      std::max(tm.na.rowwise().sum().maxCoeff(), tm.nb.rowwise().sum().maxCoeff());
  if (!(max_row_sum < 1.0)) {
    throw std::runtime_error(
        "build_transfer_matrices: operator row sum reached 1; contraction lost");
  }
  return tm;
}

double default_cell_width(const SwitchedSystem& sw, const ChartGrid& grid) {
  if (grid.size() < 2) throw std::invalid_argument("default_cell_width: grid too small");
  double spacing = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < grid.angles.size(); ++i) {
    spacing = std::min(spacing, grid.angles[i] - grid.angles[i - 1]);
  }
  const double speed = std::max({sw.sys_a().norm(), sw.sys_b().norm(), 1e-12});
  return spacing / speed;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> solve_transfer(const TransferMatrices& tm) {
  const Eigen::Index n = tm.na.rows();
  if (tm.nb.rows() != n || tm.na.cols() != n || tm.nb.cols() != n || tm.ga.size() != n ||
      tm.gb.size() != n) {
    throw std::invalid_argument("solve_transfer: inconsistent transfer-matrix sizes");
  }
  Eigen::MatrixXd psi = Eigen::MatrixXd::Identity(2 * n, 2 * n);
  psi.topRightCorner(n, n) = -tm.na;
  psi.bottomLeftCorner(n, n) = -tm.nb;
  Eigen::VectorXd rhs(2 * n);
  rhs << tm.ga, tm.gb;
  const Eigen::VectorXd sol = psi.partialPivLu().solve(rhs);
  if (!sol.allFinite()) {
    throw std::runtime_error("solve_transfer: linear solve produced non-finite values");
  }
  return {sol.head(n), sol.tail(n)};
}

}  // namespace riccati
