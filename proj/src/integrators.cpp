#include "sgiif/integrators.hpp"

#include "sgiif/krylov_expm.hpp"
#include "sgiif/quadrature.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <numeric>
#include <ostream>
#include <sstream>

namespace sgiif
{
std::vector<double> iif_weights(double t_next, std::vector<double> const &history)
{
  expect(!history.empty(), "iif_weights: at least one history node is required");
  double const t_n = history.front();
  double const dt  = t_next - t_n;
  expect(dt > 0.0, "iif_weights: step must be positive");
  std::vector<double> nodes{t_next};
  nodes.insert(nodes.end(), history.begin(), history.end());
  int const r = static_cast<int>(nodes.size());
  // the Lagrange polynomials have degree r-1; an r-point rule is exact
  auto const rule = gauss_rule(r);
  std::vector<double> w(r, 0.0);
  for (std::size_t q = 0; q < rule.nodes.size(); ++q)
  {
    double const t = t_n + rule.nodes[q] * dt;
    for (int i = 0; i < r; ++i)
    {
      double l = 1.0;
      for (int k = 0; k < r; ++k)
      {
        if (k != i)
        {
          l *= (t - nodes[k]) / (nodes[i] - nodes[k]);
        }
      }
      w[i] += rule.weights[q] * l;
    }
  }
  return w;
}

std::vector<double> iif_coefficients(int r)
{
  expect(r >= 1 && r <= 6, "iif_coefficients: order must be in 1..6");
  // exact integer arithmetic on nodes 1, 0, -1, ..., one final division
  std::vector<double> out;
  for (int j = 0; j < r; ++j)
  {
    std::vector<long long> poly{1}; // ascending powers
    long long denom = 1;
    for (int m = 0; m < r; ++m)
    {
      if (m == j)
      {
        continue;
      }
      long long const node = 1 - m;
      std::vector<long long> next(poly.size() + 1, 0);
      for (std::size_t i = 0; i < poly.size(); ++i)
      {
        next[i + 1] += poly[i];
        next[i] -= node * poly[i];
      }
      poly = std::move(next);
      denom *= (1 - j) - node;
    }
    // integral over [0, 1]: sum poly[i] / (i + 1)
    long long num = 0, den = 1;
    for (std::size_t i = 0; i < poly.size(); ++i)
    {
      long long const d = static_cast<long long>(i) + 1;
      num               = num * d + poly[i] * den;
      den *= d;
      long long const g = std::gcd(std::abs(num), den);
      num /= g;
      den /= g;
    }
    den *= denom;
    if (den < 0)
    {
      num = -num;
      den = -den;
    }
    long long const g = std::gcd(std::abs(num), den);
    out.push_back(static_cast<double>(num / g) / static_cast<double>(den / g));
  }
  return out;
}

integrator_kind parse_integrator(std::string const &raw)
{
  std::string name = raw;
  std::transform(name.begin(), name.end(), name.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (name == "iif2")
  {
    return integrator_kind::iif2;
  }
  if (name == "iif3")
  {
    return integrator_kind::iif3;
  }
  if (name == "rk2")
  {
    return integrator_kind::rk2;
  }
  if (name == "rk3")
  {
    return integrator_kind::rk3;
  }
  throw validation_error("unknown integrator '" + name + "' (expected iif2, iif3, rk2 or rk3)");
}

std::string to_string(integrator_kind kind)
{
  switch (kind)
  {
  case integrator_kind::iif2: return "iif2";
  case integrator_kind::iif3: return "iif3";
  case integrator_kind::rk2: return "rk2";
  case integrator_kind::rk3: return "rk3";
  }
  return "?";
}

namespace
{
void check_finite(Vector const &v, char const *what)
{
  if (!v.allFinite())
  {
    throw numerical_error(std::string(what) + " produced a non-finite value");
  }
}

Vector linear_rhs(split_system const &system, Vector const &U)
{
  std::int64_t const n = system.block_size();
  Vector out(U.size());
  Vector y(n);
  for (int s = 0; s < system.species(); ++s)
  {
    Vector const x = U.segment(s * n, n);
    system.apply_linear(s, x, y);
    out.segment(s * n, n) = y;
  }
  return out;
}

Vector full_rhs(split_system &system, Vector const &U, double t)
{
  Vector r = linear_rhs(system, U);
  if (system.has_nonlinear())
  {
    r += system.nonlinear(U, t);
  }
  return r;
}
} // namespace

Vector propagate(split_system const &system, Vector const &U, double tau, int krylov_dim,
                 int *m_eff)
{
  std::int64_t const n = system.block_size();
  Vector out(U.size());
  int used = 0;
  for (int s = 0; s < system.species(); ++s)
  {
    Vector const x = U.segment(s * n, n);
    if (x.squaredNorm() == 0.0)
    {
      out.segment(s * n, n).setZero();
      continue;
    }
    LinearOperator const op = [&system, s](Vector const &a, Vector &b) {
      system.apply_linear(s, a, b);
    };
    int m = 0;
    out.segment(s * n, n) = expm_multiply(op, x, tau, krylov_dim, &m);
    used = std::max(used, m);
  }
  if (m_eff != nullptr)
  {
    *m_eff = std::max(*m_eff, used);
  }
  return out;
}

Vector newton_solve(split_system &system, Vector const &E, double c, double t,
                    newton_config const &cfg, newton_report *report)
{
  expect(cfg.abs_tol > 0 && cfg.rel_tol > 0 && cfg.linear_tol > 0 && cfg.max_iter >= 1 &&
             cfg.linear_max_iter >= 1,
         "newton: tolerances and iteration limits must be positive");
  newton_report local;
  newton_report &rep = report != nullptr ? *report : local;
  rep                = {};
  Vector U           = E;
  if (!system.has_nonlinear())
  {
    rep.f_at_solution = Vector::Zero(E.size());
    rep.residuals.push_back(0.0);
    return U;
  }
  double g0 = 0.0;
  for (int it = 0;; ++it)
  {
    Vector const f = system.nonlinear(U, t);
    check_finite(f, "reaction evaluation");
    Vector const g    = U - c * f - E;
    double const gmax = g.cwiseAbs().maxCoeff();
    rep.residuals.push_back(gmax);
    if (it == 0)
    {
      g0 = gmax;
    }
    if (gmax <= cfg.abs_tol || (g0 > 0.0 && gmax <= cfg.rel_tol * g0))
    {
      rep.iterations    = it;
      rep.f_at_solution = f;
      return U;
    }
    if (it >= cfg.max_iter)
    {
      std::ostringstream msg;
      msg << "Newton did not converge in " << cfg.max_iter << " iterations; residuals:";
      for (double r : rep.residuals)
      {
        msg << ' ' << r;
      }
      throw numerical_error(msg.str());
    }
    system.linearize(U, t);
    LinearOperator const jac = [&](Vector const &w, Vector &y) {
      y = w - c * system.jacobian_apply(w);
    };
    Vector const rhs = -g;
    auto const sol   = gmres(jac, rhs, Vector::Zero(rhs.size()), cfg.linear_tol,
                             cfg.linear_max_iter, std::min(cfg.linear_max_iter, 50));
    if (!sol.converged && sol.residual > 1e-6)
    {
      throw numerical_error("Newton inner GMRES stagnated at relative residual " +
                            std::to_string(sol.residual));
    }
    U += sol.x;
    check_finite(U, "Newton update");
  }
}

Vector step_rk_explicit(split_system &system, int order, Vector const &U, double t, double dt)
{
  expect(order == 2 || order == 3, "explicit Runge-Kutta order must be 2 or 3");
  Vector out;
  if (order == 2)
  {
    Vector const k1 = full_rhs(system, U, t);
    Vector const k2 = full_rhs(system, U + 0.5 * dt * k1, t + 0.5 * dt);
    out             = U + dt * k2;
  }
  else
  {
    Vector const k1 = full_rhs(system, U, t);
    Vector const k2 = full_rhs(system, U + 0.5 * dt * k1, t + 0.5 * dt);
    Vector const k3 = full_rhs(system, U - dt * k1 + 2.0 * dt * k2, t + dt);
    out             = U + dt / 6.0 * (k1 + 4.0 * k2 + k3);
  }
  check_finite(out, "explicit Runge-Kutta step");
  return out;
}

integration_result run_integration(split_system &system, Vector const &U0, double t0,
                                   integration_config const &cfg, step_observer const &observer)
{
  expect(cfg.dt > 0.0 && std::isfinite(cfg.dt), "time step must be positive");
  expect(cfg.t_final >= t0, "final time precedes the initial time");
  expect(cfg.krylov_dim >= 1, "Krylov dimension must be at least 1");
  expect(U0.size() == system.size(), "initial vector has the wrong size");

  std::vector<double> stops;
  for (double s : cfg.stop_times)
  {
    if (s > t0 && s < cfg.t_final)
    {
      stops.push_back(s);
    }
  }
  stops.push_back(cfg.t_final);
  std::sort(stops.begin(), stops.end());

  integration_result res;
  res.U       = U0;
  double t    = t0;
  int step    = 0;
  auto record = [&](int newton_iters, int m_eff) {
    step_diagnostics d{step, t, res.U.norm(), newton_iters, m_eff};
    res.steps.push_back(d);
    if (!res.U.allFinite())
    {
      throw numerical_error("non-finite solution at step " + std::to_string(step));
    }
    if (cfg.blowup_norm > 0.0 && d.norm2 > cfg.blowup_norm)
    {
      throw numerical_error("solution norm " + std::to_string(d.norm2) +
                            " exceeds the blow-up limit at step " + std::to_string(step));
    }
    return observer ? observer(d, res.U) : true;
  };
  if (!record(0, 0))
  {
    return res;
  }

  bool const iif = cfg.method == integrator_kind::iif2 || cfg.method == integrator_kind::iif3;
  int const order = (cfg.method == integrator_kind::iif3) ? 3 : 2;
  // history of (t, F) with the most recent first
  std::deque<std::pair<double, Vector>> history;
  double const tiny = 1e-12 * std::max(1.0, std::abs(cfg.t_final));

  for (double stop : stops)
  {
    while (t < stop - tiny)
    {
      double const t_next = (stop - t <= cfg.dt * (1.0 + 1e-10)) ? stop : t + cfg.dt;
      double const h      = t_next - t;
      int newton_iters    = 0;
      int m_eff           = 0;
      if (!iif)
      {
        res.U = step_rk_explicit(system, order, res.U, t, h);
      }
      else if (!system.has_nonlinear())
      {
        res.U = propagate(system, res.U, h, cfg.krylov_dim, &m_eff);
      }
      else
      {
        if (history.empty())
        {
          history.emplace_front(t, system.nonlinear(res.U, t));
        }
        // first IIF3 step falls back to two nodes
        std::size_t const depth = std::min<std::size_t>(history.size(), order - 1);
        std::vector<double> times;
        for (std::size_t i = 0; i < depth; ++i)
        {
          times.push_back(history[i].first);
        }
        auto const w = iif_weights(t_next, times);
        // E = e^{Ah}(U + h w0 F^n + e^{A(t_n - t_{n-1})}(h w1 F^{n-1}))
        Vector inner = res.U + h * w[1] * history[0].second;
        if (depth >= 2)
        {
          Vector const older = h * w[2] * history[1].second;
          inner += propagate(system, older, history[0].first - history[1].first,
                             cfg.krylov_dim, &m_eff);
        }
        Vector const E = propagate(system, inner, h, cfg.krylov_dim, &m_eff);
        newton_report rep;
        res.U        = newton_solve(system, E, h * w[0], t_next, cfg.newton, &rep);
        newton_iters = rep.iterations;
        history.emplace_front(t_next, std::move(rep.f_at_solution));
        while (history.size() > static_cast<std::size_t>(order - 1))
        {
          history.pop_back();
        }
      }
      t = t_next;
      ++step;
      if (!record(newton_iters, m_eff))
      {
        return res;
      }
    }
  }
  return res;
}

void write_diagnostics_csv(std::ostream &out, std::vector<step_diagnostics> const &steps)
{
  out << "step,t,norm2,newton_iters,krylov_dim_effective\n";
  out.precision(17);
  for (auto const &s : steps)
  {
    out << s.step << ',' << s.t << ',' << s.norm2 << ',' << s.newton_iterations << ','
        << s.krylov_dim << '\n';
  }
}

} // namespace sgiif
