#pragma once

#include <cstdint>
#include <vector>

#include "riccati/switched.hpp"

namespace riccati {

/// One event-driven trajectory of the switched system. The switching layer is
/// sampled exactly (no time stepping): the only numerical error comes from the
/// deterministic escape-time solver.
struct EscapeSample {
  std::vector<double> jump_times;  // absolute jump instants, strictly increasing
  std::vector<Mode> modes;         // modes visited, starting with z0, strictly alternating
  double escape_time = 0.0;        // realized escape time, or the cap when capped
  bool capped = false;
};

struct SimulateOptions {
  double t_cap = 50.0;
  double tol = 1e-8;  // tolerance of the per-mode deterministic escape solver
};

/// Draw one sample: repeatedly compare an Exp(λ) jump draw against the
/// deterministic escape time of the active mode; flow to the jump and toggle,
/// or escape. Identical seeds give identical samples.
EscapeSample simulate_escape(const SwitchedSystem& sw, const Eigen::MatrixXd& y0, Mode z0,
                             std::uint64_t seed, const SimulateOptions& opts = {});

struct EstimatorReport {
  double mean = 0.0;            // over uncapped samples
  double std_error = 0.0;       // sample std of uncapped samples / sqrt(count)
  long n = 0;                   // total trials requested
  double capped_fraction = 0.0; // capped trials / n, never silently dropped
};

struct EstimateOptions {
  double t_cap = 50.0;
  double tol = 1e-8;
  int threads = 1;
};

/// Mean escape time by independent replication of simulate_escape with
/// per-trial derived seeds; aggregation is pairwise and index-ordered, so the
/// report is identical regardless of thread scheduling.
EstimatorReport estimate_mean_escape(const SwitchedSystem& sw, const Eigen::MatrixXd& y0, Mode z0,
                                     long n_trials, std::uint64_t seed,
                                     const EstimateOptions& opts = {});

}  // namespace riccati
