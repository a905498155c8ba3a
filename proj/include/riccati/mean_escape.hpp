#pragma once

#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "riccati/flow.hpp"
#include "riccati/grassmann.hpp"
#include "riccati/switched.hpp"

namespace riccati {

/// Thrown when a grid carries a non-finite deterministic escape time: the
/// contraction argument behind the series and the transfer solve needs every
/// escape time bounded by a common t0, so such grids are rejected outright.
class AssumptionViolation : public std::runtime_error {
 public:
  explicit AssumptionViolation(const std::string& what) : std::runtime_error(what) {}
};

/// Grid of lines in ℝ² (sorted angles) with per-point deterministic escape
/// times and, once solved, mean escape times for both starting modes.
struct ChartGrid {
  std::vector<double> angles;  // sorted, strictly inside (−π/2, π/2)
  Eigen::VectorXd escape_a;    // deterministic escape time under mode A
  Eigen::VectorXd escape_b;    // deterministic escape time under mode B
  Eigen::VectorXd mean_a;      // mean escape time starting in mode A
  Eigen::VectorXd mean_b;      // mean escape time starting in mode B
  double residual = std::numeric_limits<double>::quiet_NaN();  // sup-norm of final series term

  Eigen::Index size() const { return static_cast<Eigen::Index>(angles.size()); }
};

/// Uniform grid ±spacing·floor((π/2)/spacing) around 0, strictly inside the chart.
ChartGrid grid_from_spacing(double spacing);
/// Grid over an existing net of lines.
ChartGrid grid_from_net(const std::vector<ProjectiveAngle>& net);

struct BoundedCheck {
  double t0 = 0.0;                       // max finite escape time observed
  bool ok = true;                        // every grid point escapes before t_cap in both modes
  std::vector<Eigen::Index> offenders;   // grid indices with a non-finite escape time
};

/// Fills escape_a/escape_b for every grid point and reports whether the
/// escape times admit the common bound t0 required by the mean-escape solvers.
BoundedCheck check_bounded(const SwitchedSystem& sw, ChartGrid& grid, double t_cap,
                           double tol = 1e-8, int threads = 1);

/// Expected time-to-jump truncated at the escape time T:
///   ∫₀^T τ·λe^{−λτ} dτ + T·e^{−λT}  =  (1 − e^{−λT}) / λ.
/// Accepts T = +∞ (full expectation 1/λ).
double g_value(double t_escape, const PoissonLaw& law);

/// One application of the jump-integral operator to a grid function:
///   (M T)(s) = ∫₀^{tEsc(s)} f(τ)·T(Y(τ; s)) dτ,
/// by composite Simpson quadrature; T at a flowed state is linear
/// interpolation in angle. Requires d = 2, k = 1.
Eigen::VectorXd apply_m(const Eigen::VectorXd& t_values, const RiccatiSystem& sys,
                        const Eigen::VectorXd& escape_times, const PoissonLaw& law,
                        const std::vector<double>& angles, int threads = 1);

struct SeriesOptions {
  int max_terms = 21;  // number of series terms accumulated
  double tol = 0.0;    // early stop once the latest term's sup-norm drops below this
  int threads = 1;
};

/// Mean escape times as the convergent series Σₖ Mᵏ[g1; g2] with the
/// block-off-diagonal jump operator M = [0 M1; M2 0]. Terms shrink at least
/// geometrically with ratio F(t0) < 1, so the truncation error is bounded by
/// residual·F(t0)/(1 − F(t0)). Fills mean_a/mean_b/residual on the grid.
void solve_power_series(const SwitchedSystem& sw, ChartGrid& grid, const SeriesOptions& opts = {});

/// Finite-rank surrogates of the jump operators on the grid: nonnegative
/// matrices with row sums F(tEsc(s_ℓ)) ≤ F(t0) < 1, plus the source vectors.
struct TransferMatrices {
  Eigen::MatrixXd na;  // L×L, mode-A operator
  Eigen::MatrixXd nb;  // L×L, mode-B operator
  Eigen::VectorXd ga;  // g1 on the grid
  Eigen::VectorXd gb;  // g2 on the grid
};

/// Discretize the jump operators with time cells of width h and nearest-grid
/// quantization of the flowed state:
///   NA[ℓ,m] = Σ_n ξ_n(s_ℓ) over cells n whose flowed state quantizes to s_m,
///   ξ_n(s)  = ∫_{nh}^{(n+1)h} f(τ)·1[τ < tEsc(s)] dτ.
TransferMatrices build_transfer_matrices(const SwitchedSystem& sw, const ChartGrid& grid, double h);

/// Heuristic default cell width: grid spacing divided by the largest flow
/// speed ‖A‖, ‖B‖, so one cell moves a state at most one grid step.
double default_cell_width(const SwitchedSystem& sw, const ChartGrid& grid);

/// Solve [I −NA; −NB I]·[TA; TB] = [gA; gB]; returns (TA, TB) on the grid.
std::pair<Eigen::VectorXd, Eigen::VectorXd> solve_transfer(const TransferMatrices& tm);

/// Clamped linear interpolation of grid values at an arbitrary angle.
double interpolate_on_grid(const std::vector<double>& angles, const Eigen::VectorXd& values,
                           double theta);

}  // namespace riccati
