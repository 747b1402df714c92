#pragma once

#include "sgiif/common.hpp"

#include <functional>
#include <iosfwd>
#include <vector>

namespace sgiif
{
/// Semi-discrete system dU/dt = A U + F(U, t) with A block diagonal over
/// species (species-major storage).
class split_system
{
public:
  virtual ~split_system() = default;

  virtual int species() const                 = 0;
  virtual std::int64_t block_size() const     = 0;
  std::int64_t size() const { return species() * block_size(); }

  /// y = A_s x for one species block.
  virtual void apply_linear(int s, Vector const &x, Vector &y) const = 0;

  /// False when F vanishes identically.
  virtual bool has_nonlinear() const = 0;
  virtual Vector nonlinear(Vector const &U, double t) = 0;

  /// Prepares jacobian_apply for dF/dU at (U, t).
  virtual void linearize(Vector const &U, double t) = 0;
  virtual Vector jacobian_apply(Vector const &w) const = 0;
};

/// Weights of the r-point IIF quadrature on a uniform grid, ordered
/// (alpha_1, alpha_0, alpha_{-1}, ...). Supports 1 <= r <= 6.
std::vector<double> iif_coefficients(int r);

/// Same weights for arbitrary node times: integral over [t_n, t_n + dt] of the
/// Lagrange basis through nodes {t_n + dt, t_n, t_{n-1}, ...}, divided by dt.
/// `history` lists t_n, t_{n-1}, ... (most recent first).
std::vector<double> iif_weights(double t_next, std::vector<double> const &history);

struct newton_config
{
  double abs_tol    = 1e-10; ///< on |G|_inf
  double rel_tol    = 1e-12; ///< on |G_k|_inf / |G_0|_inf
  int max_iter      = 50;
  double linear_tol = 1e-12;
  int linear_max_iter = 200;
};

struct newton_report
{
  int iterations = 0;
  std::vector<double> residuals; ///< |G|_inf per iterate, starting with the guess
  Vector f_at_solution;          ///< F(U) at the returned iterate
};

/// Solves U - c F(U, t) = E by Newton's method with GMRES inner solves,
/// starting from E. The Jacobian action is (I - c dF/dU).
Vector newton_solve(split_system &system, Vector const &E, double c, double t,
                    newton_config const &cfg, newton_report *report = nullptr);

enum class integrator_kind
{
  iif2,
  iif3,
  rk2,
  rk3
};

integrator_kind parse_integrator(std::string const &name);
std::string to_string(integrator_kind kind);

struct integration_config
{
  integrator_kind method = integrator_kind::iif2;
  double dt             = 0.0;
  double t_final        = 0.0;
  int krylov_dim        = 25;
  newton_config newton{};
  /// Times the step sequence must land on (snapshot times); steps are
  /// shortened to hit them.
  std::vector<double> stop_times;
  /// Abort when |U|_2 exceeds this value (0 disables).
  double blowup_norm = 0.0;
};

struct step_diagnostics
{
  int step               = 0;
  double t               = 0.0;
  double norm2           = 0.0;
  int newton_iterations  = 0;
  int krylov_dim         = 0; ///< largest Krylov dimension used in the step
};

struct integration_result
{
  Vector U;
  std::vector<step_diagnostics> steps;
};

/// Called after every accepted step (and once for the initial state with
/// step = 0). Return false to stop early.
using step_observer = std::function<bool(step_diagnostics const &, Vector const &U)>;

/// One explicit Runge-Kutta step (midpoint RK2 or Kutta RK3) of dU/dt = AU + F.
Vector step_rk_explicit(split_system &system, int order, Vector const &U, double t, double dt);

/// e^{A tau} applied blockwise; reports the largest Krylov dimension used.
Vector propagate(split_system const &system, Vector const &U, double tau, int krylov_dim,
                 int *m_eff = nullptr);

/// Integrates from (U0, t0) to cfg.t_final.
integration_result run_integration(split_system &system, Vector const &U0, double t0,
                                   integration_config const &cfg,
                                   step_observer const &observer = {});

/// Writes the per-step CSV `step,t,norm2,newton_iters,krylov_dim_effective`.
void write_diagnostics_csv(std::ostream &out, std::vector<step_diagnostics> const &steps);

} // namespace sgiif
