#pragma once

#include "sgiif/integrators.hpp"
#include "sgiif/problems.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sgiif
{
/// Time step rule: a multiple of h_N or an absolute value.
struct dt_rule
{
  bool relative = true;
  double value  = 1.0;

  /// "h", "0.5h", "2*h" (relative) or a plain number (absolute).
  static dt_rule parse(std::string const &text);
  double resolve(int max_level) const;
  std::string to_string() const;
};

struct run_config
{
  int example  = 1;
  int dims     = 2;
  int k_poly   = 1;
  int n_min    = 4;
  int n_max    = 4;
  grid_kind grid = grid_kind::sparse;
  dt_rule dt{};
  double t_final = 2.0;
  int krylov_dim = 25;
  /// Empty selects IIF2 for k <= 1 and IIF3 otherwise.
  std::optional<integrator_kind> method;
  double sigma = 20.0;
  example_params params{};
  std::string output_dir = ".";
  std::vector<double> snapshot_times;
  int lattice_points = 256;
  std::uint64_t seed = 1;
  /// Per-step diagnostics CSV for single-level runs ("" disables).
  std::string diagnostics_path;

  integrator_kind resolved_method() const;
  /// Throws validation_error for inconsistent settings.
  void validate() const;
};

/// Applies `key = value` settings (file lines or command-line pairs).
void apply_setting(run_config &cfg, std::string const &key, std::string const &value);
/// Reads a config file: `key = value` lines, `#` comments.
void load_config_file(run_config &cfg, std::string const &path);

struct run_outcome
{
  std::int64_t dof = 0;
  int steps        = 0;
  double seconds   = 0.0;
  std::vector<double> errors; ///< per species
  Vector U;
  std::vector<step_diagnostics> diagnostics;
};

/// One integration of cfg.example on level N with the configured step rule.
run_outcome run_single(run_config const &cfg, int N);

struct convergence_row
{
  int N            = 0;
  std::int64_t dof = 0;
  std::vector<double> error;
  std::vector<std::optional<double>> order;
  double cpu_seconds = 0.0;
  int steps          = 0;
};

/// One run per N in [n_min, n_max]. Rows are streamed to `csv` (when given)
/// as they complete, so a failure leaves a partial table.
std::vector<convergence_row> run_convergence(run_config const &cfg, std::ostream *csv = nullptr);
void write_convergence_header(std::ostream &out, int species);
void write_convergence_row(std::ostream &out, convergence_row const &row);

struct cfl_result
{
  double cfl      = 0.0; ///< kappa d dt / h^2, three significant digits
  double dt       = 0.0;
  int trials      = 0;
};

/// Largest stable explicit RK step for the heat example, by bracketing and
/// bisection. The start vector is the projected initial data plus a seeded
/// random perturbation of equal norm; a trial is unstable once |U|_2 exceeds
/// 10 |U^0|_2 before T = 1.
cfl_result find_cfl(int dims, int k_poly, int N, grid_kind grid, int rk_order,
                    std::uint64_t seed = 1, double sigma = 20.0);

struct spectral_result
{
  std::int64_t dof = 0;
  double lambda0   = 0.0; ///< most negative eigenvalue of the kappa = 1 operator
  double cond2     = 0.0; ///< of I - h_N A
  int iterations   = 0;
};

spectral_result spectral_diagnostics(int dims, int k_poly, int N, grid_kind grid,
                                     double sigma = 20.0, std::uint64_t seed = 1);

struct krylov_row
{
  int M = 0;
  std::int64_t dof = 0;
  double error_single_step = 0.0; ///< dt = T
  double error_fine_step   = 0.0; ///< dt from the config rule
};

/// Errors of the heat example at level cfg.n_max for every M.
std::vector<krylov_row> krylov_study(run_config const &cfg, std::vector<int> const &Ms);

struct snapshot_info
{
  double t = 0.0;
  std::string path;
  double min = 0.0, max = 0.0, mean = 0.0;
  int local_maxima = 0; ///< strict maxima above the mean (periodic 8-neighbourhood)
};

/// Species-0 values on a cell-centred n x n lattice, row-major in (x1, x2).
std::vector<double> lattice_values(Vector const &c, dof_map const &dofs, int n);
/// Peaks within 1e-10 (relative) of the mean are ignored.
int count_local_maxima_above_mean(std::vector<double> const &values, int n);

/// Pattern-formation run (example 5). Writes one CSV per snapshot time into
/// cfg.output_dir; t = 0 is always included.
std::vector<snapshot_info> run_pattern(run_config const &cfg);

} // namespace sgiif
