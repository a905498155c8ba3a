// Command-line front end: reads a JSON job description, runs one of the
// escape-time computations, and writes plot-ready CSV/JSON artifacts whose
// metadata embeds the fully resolved configuration.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>

#include "riccati/flow.hpp"
#include "riccati/grassmann.hpp"
#include "riccati/mean_escape.hpp"
#include "riccati/monte_carlo.hpp"
#include "riccati/switched.hpp"

namespace {

using json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitAssumption = 3;
constexpr int kExitNumerical = 4;

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct CommonOptions {
  std::string config_path;
  std::string out_dir = ".";
  int threads = 0;  // 0: all hardware threads
  std::optional<std::uint64_t> seed_override;
};

std::string format_number(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
}

const json& require_field(const json& cfg, const std::string& key) {
  if (!cfg.contains(key)) throw ConfigError("missing config field '" + key + "'");
  return cfg.at(key);
}

double number_field(const json& cfg, const std::string& key, double fallback) {
  if (!cfg.contains(key)) return fallback;
  if (!cfg.at(key).is_number()) throw ConfigError("config field '" + key + "' must be a number");
  return cfg.at(key).get<double>();
}

long integer_field(const json& cfg, const std::string& key, long fallback) {
  if (!cfg.contains(key)) return fallback;
  const auto& v = cfg.at(key);
  if (!v.is_number_integer()) throw ConfigError("config field '" + key + "' must be an integer");
  return v.get<long>();
}

std::string string_field(const json& cfg, const std::string& key, const std::string& fallback) {
  if (!cfg.contains(key)) return fallback;
  if (!cfg.at(key).is_string()) throw ConfigError("config field '" + key + "' must be a string");
  return cfg.at(key).get<std::string>();
}

Eigen::MatrixXd parse_matrix(const json& value, const std::string& field) {
  if (!value.is_array() || value.empty() || !value.front().is_array()) {
    throw ConfigError("config field '" + field + "' must be a nested array of numbers");
  }
  const auto rows = static_cast<Eigen::Index>(value.size());
  const auto cols = static_cast<Eigen::Index>(value.front().size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = value.at(static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ConfigError("config field '" + field + "' has ragged rows");
    }
    for (Eigen::Index j = 0; j < cols; ++j) {
      const auto& cell = row.at(static_cast<std::size_t>(j));
      if (!cell.is_number()) throw ConfigError("config field '" + field + "' has a non-number");
      m(i, j) = cell.get<double>();
    }
  }
  return m;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

riccati::RiccatiSystem parse_system(const json& cfg, const std::string& field) {
  const json& sys = require_field(cfg, field);
  if (!sys.is_object()) throw ConfigError("config field '" + field + "' must be an object");
  const Eigen::MatrixXd a = parse_matrix(require_field(sys, "a"), field + ".a");
  const long k = integer_field(sys, "k", -1);
  if (k < 1) throw ConfigError("config field '" + field + ".k' must be a positive integer");
  try {
    return {a, static_cast<Eigen::Index>(k)};
  } catch (const std::invalid_argument& e) {
    throw ConfigError("config field '" + field + "': " + e.what());
  }
}

riccati::SwitchedSystem parse_switched(const json& cfg) {
  auto sys_a = parse_system(cfg, "system_a");
  auto sys_b = parse_system(cfg, "system_b");
  const double lambda = number_field(cfg, "lambda", 0.0);
  if (!(lambda > 0.0)) throw ConfigError("config field 'lambda' must be a positive number");
  try {
    return {std::move(sys_a), std::move(sys_b), lambda};
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("switched system: ") + e.what());
  }
}

Eigen::MatrixXd parse_initial_state(const json& cfg, const riccati::RiccatiSystem& sys) {
  if (cfg.contains("theta0")) {
    if (sys.dim() != 2 || sys.k() != 1) {
      throw ConfigError("config field 'theta0' applies to d = 2, k = 1 systems only");
    }
    const double theta = number_field(cfg, "theta0", 0.0);
    Eigen::MatrixXd y(1, 1);
    y(0, 0) = std::tan(theta);
    return y;
  }
  Eigen::MatrixXd y = parse_matrix(require_field(cfg, "y0"), "y0");
  if (y.rows() != sys.codim() || y.cols() != sys.k()) {
    throw ConfigError("config field 'y0' must be a (d-k) x k matrix");
  }
  return y;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write to '" + tmp.string() + "'");
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

std::filesystem::path output_path(const CommonOptions& common, const std::string& filename) {
  std::filesystem::create_directories(common.out_dir);
  return std::filesystem::path(common.out_dir) / filename;
}

std::string metadata_block(const std::string& command, const json& resolved,
                           const std::vector<std::string>& extra_lines) {
  std::ostringstream os;
  os << "# riccati-escape " << command << "\n";
  os << "# config = " << resolved.dump() << "\n";
  for (const auto& line : extra_lines) os << "# " << line << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// escape-time

int run_escape_time(const json& cfg, const CommonOptions& common) {
  const riccati::RiccatiSystem sys = parse_system(cfg, "system");
  const Eigen::MatrixXd y0 = parse_initial_state(cfg, sys);

  riccati::EscapeOptions opts;
  opts.max_steps = static_cast<int>(integer_field(cfg, "n_max", opts.max_steps));
  opts.t_cap = number_field(cfg, "t_cap", opts.t_cap);
  opts.tol = number_field(cfg, "tol", opts.tol);
  const std::string filename = string_field(cfg, "output", "escape_time.csv");

  const riccati::EscapeResult result = riccati::escape_time(sys, y0, opts);

  json resolved;
  resolved["command"] = "escape-time";
  resolved["system"] = {{"a", matrix_to_json(sys.a())}, {"k", sys.k()}};
  resolved["y0"] = matrix_to_json(y0);
  resolved["n_max"] = opts.max_steps;
  resolved["t_cap"] = opts.t_cap;
  resolved["tol"] = opts.tol;
  resolved["output"] = filename;

  std::string outcome;
  switch (result.kind) {
    case riccati::EscapeResult::Kind::Finite:
      outcome = "finite";
      std::cout << "escape time: " << format_number(result.time) << "\n";
      break;
    case riccati::EscapeResult::Kind::NotBefore:
      outcome = "not-before-cap";
      std::cout << "no escape before " << format_number(result.time) << "\n";
      break;
    case riccati::EscapeResult::Kind::NoEscapeFromLinearPart:
      outcome = "no-escape-from-linear-part";
      std::cout << "escape impossible: top block-row of A is zero\n";
      break;
  }

  std::ostringstream body;
  body << "n,t_n[time],log_delta[log time]\n";
  for (std::size_t n = 0; n < result.steps.size(); ++n) {
    double log_delta = std::numeric_limits<double>::quiet_NaN();
    if (n + 1 < result.steps.size()) {
      log_delta = std::log(result.steps[n + 1] - result.steps[n]);
    } else {
      const auto y_end = riccati::flow(sys, y0, result.steps[n]);
      if (y_end) log_delta = std::log(riccati::delta_step(sys, *y_end));
    }
    body << n << "," << format_number(result.steps[n]) << ","
         << (std::isnan(log_delta) ? "nan" : format_number(log_delta)) << "\n";
  }

  std::vector<std::string> extra = {
      "outcome = " + outcome,
      "escape_time = " + format_number(result.time),
      "tol = " + format_number(opts.tol) + " (step stall threshold and bisection bracket width)",
      "columns: n (step index), t_n[time] (step sequence), log_delta[log time] (log of the "
      "guaranteed-existence step at t_n)"};
  atomic_write(output_path(common, filename), metadata_block("escape-time", resolved, extra) + body.str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// profile

int run_profile(const json& cfg, const CommonOptions& common) {
  const riccati::RiccatiSystem sys = parse_system(cfg, "system");

  riccati::ProfileOptions opts;
  opts.n_steps = static_cast<int>(integer_field(cfg, "n_steps", opts.n_steps));
  opts.t_cap = number_field(cfg, "t_cap", opts.t_cap);
  opts.tol = number_field(cfg, "tol", opts.tol);
  opts.seed = static_cast<std::uint64_t>(integer_field(cfg, "seed", 0));
  if (common.seed_override) opts.seed = *common.seed_override;
  opts.threads = common.threads;
  const long n_seeds = integer_field(cfg, "n_seeds", 100);
  if (n_seeds < 0) throw ConfigError("config field 'n_seeds' must be nonnegative");
  const std::string filename = string_field(cfg, "output", "profile.csv");

  std::string sampler_type = "box";
  double low = -3.0, high = 3.0;
  if (cfg.contains("sampler")) {
    const json& s = cfg.at("sampler");
    if (!s.is_object()) throw ConfigError("config field 'sampler' must be an object");
    sampler_type = string_field(s, "type", "box");
    low = number_field(s, "low", low);
    high = number_field(s, "high", high);
  }
  riccati::StateSampler sampler;
  if (sampler_type == "box") {
    sampler = riccati::box_sampler(sys.codim(), sys.k(), low, high);
  } else if (sampler_type == "angle") {
    if (sys.dim() != 2 || sys.k() != 1) {
      throw ConfigError("config field 'sampler.type' = 'angle' needs d = 2, k = 1");
    }
    sampler = riccati::angle_sampler();
  } else {
    throw ConfigError("config field 'sampler.type' must be 'box' or 'angle'");
  }

  const auto profile = riccati::escape_profile(sys, sampler, static_cast<int>(n_seeds), opts);

  json resolved;
  resolved["command"] = "profile";
  resolved["system"] = {{"a", matrix_to_json(sys.a())}, {"k", sys.k()}};
  resolved["n_seeds"] = n_seeds;
  resolved["n_steps"] = opts.n_steps;
  resolved["t_cap"] = opts.t_cap;
  resolved["tol"] = opts.tol;
  resolved["seed"] = opts.seed;
  resolved["sampler"] = {{"type", sampler_type}, {"low", low}, {"high", high}};
  resolved["output"] = filename;

  std::ostringstream body;
  const Eigen::Index rows = sys.codim();
  const Eigen::Index cols = sys.k();
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) body << "y_" << i << "_" << j << "[state],";
  }
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) body << "atan_y_" << i << "_" << j << "[rad],";
  }
  body << "escape_time[time],atan_escape_time[rad]\n";
  for (const auto& pt : profile) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) body << format_number(pt.state(i, j)) << ",";
    }
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) body << format_number(std::atan(pt.state(i, j))) << ",";
    }
    body << format_number(pt.escape_time) << "," << format_number(std::atan(pt.escape_time))
         << "\n";
  }

  std::vector<std::string> extra = {
      "points = " + std::to_string(profile.size()),
      "tol = " + format_number(opts.tol) + " (escape solver tolerance)",
      "columns: states, arc-tangent rescaled states, escape time (inf = not before t_cap), "
      "arc-tangent rescaled escape time"};
  atomic_write(output_path(common, filename), metadata_block("profile", resolved, extra) + body.str());
  std::cout << "profile points: " << profile.size() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// mean-escape

json switched_to_json(const riccati::SwitchedSystem& sw) {
  json j;
  j["system_a"] = {{"a", matrix_to_json(sw.sys_a().a())}, {"k", sw.sys_a().k()}};
  j["system_b"] = {{"a", matrix_to_json(sw.sys_b().a())}, {"k", sw.sys_b().k()}};
  j["lambda"] = sw.law().lambda;
  return j;
}

void bounded_or_throw(const riccati::BoundedCheck& check) {
  if (!check.ok) {
    throw riccati::AssumptionViolation(
        "escape times are not uniformly bounded on the grid (" +
        std::to_string(check.offenders.size()) + " offending grid points)");
  }
}

int run_mean_escape(const json& cfg, const CommonOptions& common) {
  const riccati::SwitchedSystem sw = parse_switched(cfg);
  const std::string method = string_field(cfg, "method", "series");
  const double t_cap = number_field(cfg, "t_cap", 50.0);
  const double tol = number_field(cfg, "tol", 1e-8);
  const std::string filename = string_field(cfg, "output", "mean_escape.csv");

  json resolved = switched_to_json(sw);
  resolved["command"] = "mean-escape";
  resolved["method"] = method;
  resolved["t_cap"] = t_cap;
  resolved["tol"] = tol;
  resolved["output"] = filename;

  riccati::ChartGrid grid;
  std::vector<std::string> extra;
  if (method == "series") {
    const double spacing = number_field(cfg, "grid_spacing", 0.005);
    const long terms = integer_field(cfg, "terms", 21);
    const double series_tol = number_field(cfg, "series_tol", 0.0);
    resolved["grid_spacing"] = spacing;
    resolved["terms"] = terms;
    resolved["series_tol"] = series_tol;

    grid = riccati::grid_from_spacing(spacing);
    const riccati::BoundedCheck check = riccati::check_bounded(sw, grid, t_cap, tol, common.threads);
    bounded_or_throw(check);
    riccati::SeriesOptions opts;
    opts.max_terms = static_cast<int>(terms);
    opts.tol = series_tol;
    opts.threads = common.threads;
    riccati::solve_power_series(sw, grid, opts);

    const double f_t0 = sw.law().cdf(check.t0);
    extra.push_back("t0 = " + format_number(check.t0) + " (max deterministic escape on grid)");
    extra.push_back("F_t0 = " + format_number(f_t0) + " (series contraction factor)");
    extra.push_back("residual = " + format_number(grid.residual) + " (sup-norm of final term)");
    extra.push_back("truncation_bound = " + format_number(grid.residual * f_t0 / (1.0 - f_t0)));
  } else if (method == "transfer") {
    const double epsilon = number_field(cfg, "epsilon", 0.01);
    resolved["epsilon"] = epsilon;

    grid = riccati::grid_from_net(riccati::build_net(epsilon));
    const double h =
        cfg.contains("h") ? number_field(cfg, "h", 0.0) : riccati::default_cell_width(sw, grid);
    resolved["h"] = h;
    const riccati::BoundedCheck check = riccati::check_bounded(sw, grid, t_cap, tol, common.threads);
    bounded_or_throw(check);
    const riccati::TransferMatrices tm = riccati::build_transfer_matrices(sw, grid, h);
    const auto [ta, tb] = riccati::solve_transfer(tm);
    grid.mean_a = ta;
    grid.mean_b = tb;

    extra.push_back("t0 = " + format_number(check.t0) + " (max deterministic escape on grid)");
    extra.push_back("epsilon = " + format_number(epsilon) + " (net covering radius)");
    extra.push_back("h = " + format_number(h) + " (time cell width" +
                    (cfg.contains("h") ? "" : "; defaulted to net spacing / max flow speed") + ")");
  } else {
    throw ConfigError("config field 'method' must be 'series' or 'transfer'");
  }

  extra.push_back("tol = " + format_number(tol) + " (deterministic escape solver tolerance)");
  extra.push_back(
      "columns: theta[rad] (grid angle), t_escape_a/b[time] (deterministic escape), "
      "mean_escape_a/b[time] (mean escape starting in mode A/B)");

  std::ostringstream body;
  body << "theta[rad],t_escape_a[time],t_escape_b[time],mean_escape_a[time],mean_escape_b[time]\n";
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    body << format_number(grid.angles[static_cast<std::size_t>(i)]) << ","
         << format_number(grid.escape_a(i)) << "," << format_number(grid.escape_b(i)) << ","
         << format_number(grid.mean_a(i)) << "," << format_number(grid.mean_b(i)) << "\n";
  }
  atomic_write(output_path(common, filename), metadata_block("mean-escape", resolved, extra) + body.str());
  std::cout << "mean escape solved on " << grid.size() << " grid points (" << method << ")\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate

int run_simulate(const json& cfg, const CommonOptions& common) {
  const riccati::SwitchedSystem sw = parse_switched(cfg);
  const Eigen::MatrixXd y0 = parse_initial_state(cfg, sw.sys_a());
  const std::string z0_name = string_field(cfg, "z0", "A");
  if (z0_name != "A" && z0_name != "B") throw ConfigError("config field 'z0' must be 'A' or 'B'");
  const riccati::Mode z0 = z0_name == "A" ? riccati::Mode::A : riccati::Mode::B;
  const long n_trials = integer_field(cfg, "n_trials", 10000);
  if (n_trials < 1) throw ConfigError("config field 'n_trials' must be >= 1");
  std::uint64_t seed = static_cast<std::uint64_t>(integer_field(cfg, "seed", 1));
  if (common.seed_override) seed = *common.seed_override;

  riccati::EstimateOptions opts;
  opts.t_cap = number_field(cfg, "t_cap", opts.t_cap);
  opts.tol = number_field(cfg, "tol", opts.tol);
  opts.threads = common.threads;
  const std::string filename = string_field(cfg, "output", "simulate.json");

  const riccati::EstimatorReport report =
      riccati::estimate_mean_escape(sw, y0, z0, n_trials, seed, opts);

  json resolved = switched_to_json(sw);
  resolved["command"] = "simulate";
  resolved["y0"] = matrix_to_json(y0);
  resolved["z0"] = z0_name;
  resolved["n_trials"] = n_trials;
  resolved["seed"] = seed;
  resolved["t_cap"] = opts.t_cap;
  resolved["tol"] = opts.tol;
  resolved["output"] = filename;

  json out;
  out["config"] = resolved;
  out["mean"] = report.mean;
  out["std_error"] = report.std_error;
  out["n"] = report.n;
  out["capped_fraction"] = report.capped_fraction;
  atomic_write(output_path(common, filename), out.dump(2) + "\n");
  std::cout << "mean escape estimate: " << format_number(report.mean) << " +/- "
            << format_number(report.std_error) << " (capped fraction "
            << format_number(report.capped_fraction) << ")\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// verify

int run_verify(const json& cfg, const CommonOptions& common) {
  const riccati::SwitchedSystem sw = parse_switched(cfg);
  const double t_cap = number_field(cfg, "t_cap", 50.0);
  const double tol = number_field(cfg, "tol", 1e-8);
  const double spacing = number_field(cfg, "grid_spacing", 0.005);
  const long terms = integer_field(cfg, "terms", 21);
  const double epsilon = number_field(cfg, "epsilon", 0.01);
  const double cross_tol = number_field(cfg, "cross_tol", 0.05);
  const long mc_trials = integer_field(cfg, "mc_trials", 20000);
  std::uint64_t seed = static_cast<std::uint64_t>(integer_field(cfg, "seed", 1));
  if (common.seed_override) seed = *common.seed_override;
  const std::string filename = string_field(cfg, "output", "verify.json");

  std::vector<double> mc_angles{0.0};
  if (cfg.contains("mc_angles")) {
    if (!cfg.at("mc_angles").is_array()) throw ConfigError("config field 'mc_angles' must be an array");
    mc_angles.clear();
    for (const auto& v : cfg.at("mc_angles")) {
      if (!v.is_number()) throw ConfigError("config field 'mc_angles' must hold numbers");
      mc_angles.push_back(v.get<double>());
    }
  }

  json resolved = switched_to_json(sw);
  resolved["command"] = "verify";
  resolved["grid_spacing"] = spacing;
  resolved["terms"] = terms;
  resolved["epsilon"] = epsilon;
  resolved["t_cap"] = t_cap;
  resolved["tol"] = tol;
  resolved["cross_tol"] = cross_tol;
  resolved["mc_trials"] = mc_trials;
  resolved["mc_angles"] = mc_angles;
  resolved["seed"] = seed;
  resolved["output"] = filename;

  // Route 1: power series on the uniform grid.
  riccati::ChartGrid grid = riccati::grid_from_spacing(spacing);
  const riccati::BoundedCheck check = riccati::check_bounded(sw, grid, t_cap, tol, common.threads);
  bounded_or_throw(check);
  riccati::SeriesOptions series;
  series.max_terms = static_cast<int>(terms);
  series.threads = common.threads;
  riccati::solve_power_series(sw, grid, series);

  // Route 2: transfer matrices on the covering net.
  riccati::ChartGrid net_grid = riccati::grid_from_net(riccati::build_net(epsilon));
  const double h =
      cfg.contains("h") ? number_field(cfg, "h", 0.0) : riccati::default_cell_width(sw, net_grid);
  resolved["h"] = h;
  bounded_or_throw(riccati::check_bounded(sw, net_grid, t_cap, tol, common.threads));
  const riccati::TransferMatrices tm = riccati::build_transfer_matrices(sw, net_grid, h);
  const auto [ta, tb] = riccati::solve_transfer(tm);

  double sup_diff = 0.0;
  for (Eigen::Index i = 0; i < net_grid.size(); ++i) {
    const double theta = net_grid.angles[static_cast<std::size_t>(i)];
    sup_diff = std::max(sup_diff,
                        std::abs(ta(i) - riccati::interpolate_on_grid(grid.angles, grid.mean_a, theta)));
    sup_diff = std::max(sup_diff,
                        std::abs(tb(i) - riccati::interpolate_on_grid(grid.angles, grid.mean_b, theta)));
  }
  const bool routes_agree = sup_diff <= cross_tol;

  // Route 3: Monte Carlo spot checks against the series solution.
  json mc_checks = json::array();
  bool mc_ok = true;
  riccati::EstimateOptions mc_opts;
  mc_opts.t_cap = t_cap;
  mc_opts.tol = tol;
  mc_opts.threads = common.threads;
  for (const double theta : mc_angles) {
    Eigen::MatrixXd y0(1, 1);
    y0(0, 0) = std::tan(theta);
    const riccati::EstimatorReport rep =
        riccati::estimate_mean_escape(sw, y0, riccati::Mode::A, mc_trials, seed, mc_opts);
    const double series_value = riccati::interpolate_on_grid(grid.angles, grid.mean_a, theta);
    const double band = 3.0 * rep.std_error + 0.01;
    const bool ok = std::abs(rep.mean - series_value) <= band && rep.capped_fraction < 1e-3;
    mc_ok = mc_ok && ok;
    mc_checks.push_back({{"theta", theta},
                         {"mc_mean", rep.mean},
                         {"mc_std_error", rep.std_error},
                         {"capped_fraction", rep.capped_fraction},
                         {"series_value", series_value},
                         {"band", band},
                         {"ok", ok}});
  }

  const bool pass = routes_agree && mc_ok;
  json out;
  out["config"] = resolved;
  out["bounded"] = {{"ok", check.ok}, {"t0", check.t0}};
  out["series_residual"] = grid.residual;
  const double f_t0 = sw.law().cdf(check.t0);
  out["series_truncation_bound"] = grid.residual * f_t0 / (1.0 - f_t0);
  out["transfer_vs_series_sup"] = sup_diff;
  out["cross_tol"] = cross_tol;
  out["mc_checks"] = mc_checks;
  out["pass"] = pass;
  atomic_write(output_path(common, filename), out.dump(2) + "\n");

  std::cout << "transfer vs series sup difference: " << format_number(sup_diff)
            << (routes_agree ? " (ok)" : " (FAIL)") << "\n";
  std::cout << "monte carlo checks: " << (mc_ok ? "ok" : "FAIL") << "\n";
  return pass ? kExitOk : kExitNumerical;
}

int dispatch(const std::string& command, const CommonOptions& common) {
  const json cfg = load_config(common.config_path);
  if (cfg.contains("command") && cfg.at("command").is_string() &&
      cfg.at("command").get<std::string>() != command) {
    throw ConfigError("config field 'command' (" + cfg.at("command").get<std::string>() +
                      ") does not match the invoked subcommand '" + command + "'");
  }
  if (command == "escape-time") return run_escape_time(cfg, common);
  if (command == "profile") return run_profile(cfg, common);
  if (command == "mean-escape") return run_mean_escape(cfg, common);
  if (command == "simulate") return run_simulate(cfg, common);
  if (command == "verify") return run_verify(cfg, common);
  throw ConfigError("unknown command '" + command + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Escape times of deterministic and Poisson-switched Riccati differential equations"};
  app.require_subcommand(1);

  CommonOptions common;
  std::uint64_t seed_value = 0;
  for (const auto& name : {"escape-time", "profile", "mean-escape", "simulate", "verify"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", common.config_path, "path to the JSON job description")->required();
    sub->add_option("--out", common.out_dir, "output directory");
    sub->add_option("--threads", common.threads, "worker threads (0 = all)");
    sub->add_option("--seed", seed_value, "override the config seed")
        ->each([&common, &seed_value](const std::string&) { common.seed_override = seed_value; });
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    return dispatch(command, common);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const riccati::AssumptionViolation& e) {
    std::cerr << "assumption violation: " << e.what() << "\n";
    return kExitAssumption;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}
