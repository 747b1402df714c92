#include "sgiif/harness.hpp"

#include "sgiif/krylov_expm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

namespace sgiif
{
namespace
{
std::string trim(std::string const &s)
{
  auto const b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos)
  {
    return "";
  }
  auto const e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(std::string const &key, std::string const &text)
{
  std::size_t used = 0;
  double v         = 0.0;
  try
  {
    v = std::stod(text, &used);
  }
  catch (std::exception const &)
  {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(v))
  {
    throw validation_error("invalid number for '" + key + "': '" + text + "'");
  }
  return v;
}

long long parse_int(std::string const &key, std::string const &text)
{
  std::size_t used = 0;
  long long v      = 0;
  try
  {
    v = std::stoll(text, &used);
  }
  catch (std::exception const &)
  {
    used = 0;
  }
  if (used == 0 || used != text.size())
  {
    throw validation_error("invalid integer for '" + key + "': '" + text + "'");
  }
  return v;
}

int parse_small_int(std::string const &key, std::string const &text)
{
  long long const v = parse_int(key, text);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
  {
    throw validation_error("value for '" + key + "' is out of range");
  }
  return static_cast<int>(v);
}

bool parse_bool(std::string const &key, std::string const &text)
{
  if (text == "1" || text == "true" || text == "yes" || text == "on")
  {
    return true;
  }
  if (text == "0" || text == "false" || text == "no" || text == "off")
  {
    return false;
  }
  throw validation_error("invalid boolean for '" + key + "': '" + text + "'");
}

std::vector<double> parse_list(std::string const &key, std::string const &text)
{
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
  {
    item = trim(item);
    if (!item.empty())
    {
      out.push_back(parse_double(key, item));
    }
  }
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point start)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string format_number(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6e", v);
  return buf;
}

double round_significant(double v, int digits)
{
  if (v == 0.0)
  {
    return 0.0;
  }
  double const scale = std::pow(10.0, digits - 1 - static_cast<int>(std::floor(std::log10(std::abs(v)))));
  return std::round(v * scale) / scale;
}
} // namespace

dt_rule dt_rule::parse(std::string const &raw)
{
  std::string text = trim(raw);
  expect(!text.empty(), "empty time step rule");
  dt_rule r;
  if (text.back() == 'h')
  {
    text.pop_back();
    if (!text.empty() && text.back() == '*')
    {
      text.pop_back();
    }
    r.relative = true;
    r.value    = text.empty() ? 1.0 : parse_double("dt", text);
  }
  else
  {
    r.relative = false;
    r.value    = parse_double("dt", text);
  }
  expect(r.value > 0.0, "time step must be positive");
  return r;
}

double dt_rule::resolve(int max_level) const
{
  return relative ? value * std::ldexp(1.0, -max_level) : value;
}

std::string dt_rule::to_string() const
{
  std::ostringstream s;
  s << value << (relative ? "h" : "");
  return s.str();
}

integrator_kind run_config::resolved_method() const
{
  if (method)
  {
    return *method;
  }
  return k_poly <= 1 ? integrator_kind::iif2 : integrator_kind::iif3;
}

void run_config::validate() const
{
  expect(example >= 1 && example <= 5, "example must be 1..5");
  expect(dims >= 1 && dims <= 3, "d must be 1, 2 or 3");
  expect(example != 5 || dims == 2, "example 5 requires d = 2");
  expect(k_poly >= 0 && k_poly <= 4, "k must be in 0..4");
  expect(n_min >= 1 && n_max <= 20, "levels must be in 1..20");
  expect(n_min <= n_max, "nmin (" + std::to_string(n_min) + ") exceeds nmax (" +
                             std::to_string(n_max) + ")");
  expect(dt.value > 0.0 && std::isfinite(dt.value), "time step must be positive");
  expect(t_final >= 0.0 && std::isfinite(t_final), "final time must be non-negative");
  expect(krylov_dim >= 1, "Krylov dimension M must be at least 1");
  expect(sigma > 0.0, "penalty sigma must be positive");
  expect(lattice_points >= 1, "lattice must have at least one point per direction");
  for (double t : snapshot_times)
  {
    expect(t >= 0.0 && t <= t_final, "snapshot times must lie in [0, T]");
  }
  for (int N = n_min; N <= n_max; ++N)
  {
    double const count = static_cast<double>(dof_map::count(dims, k_poly, N, grid));
    expect(count <= static_cast<double>(dof_map::default_max_dofs),
           "level " + std::to_string(N) + " exceeds the dof budget");
  }
}

void apply_setting(run_config &cfg, std::string const &raw_key, std::string const &raw_value)
{
  std::string const key   = trim(raw_key);
  std::string const value = trim(raw_value);
  if (key == "example")
  {
    cfg.example = parse_small_int(key, value);
  }
  else if (key == "d" || key == "dims")
  {
    cfg.dims = parse_small_int(key, value);
  }
  else if (key == "k" || key == "k_poly")
  {
    cfg.k_poly = parse_small_int(key, value);
  }
  else if (key == "N")
  {
    cfg.n_min = cfg.n_max = parse_small_int(key, value);
  }
  else if (key == "nmin")
  {
    cfg.n_min = parse_small_int(key, value);
  }
  else if (key == "nmax")
  {
    cfg.n_max = parse_small_int(key, value);
  }
  else if (key == "grid")
  {
    cfg.grid = parse_grid_kind(value);
  }
  else if (key == "dt")
  {
    cfg.dt = dt_rule::parse(value);
  }
  else if (key == "T")
  {
    cfg.t_final = parse_double(key, value);
  }
  else if (key == "M")
  {
    cfg.krylov_dim = parse_small_int(key, value);
  }
  else if (key == "integrator")
  {
    cfg.method = parse_integrator(value);
  }
  else if (key == "sigma")
  {
    cfg.sigma = parse_double(key, value);
  }
  else if (key == "out" || key == "output_dir")
  {
    cfg.output_dir = value;
  }
  else if (key == "snapshots")
  {
    cfg.snapshot_times = parse_list(key, value);
  }
  else if (key == "lattice")
  {
    cfg.lattice_points = parse_small_int(key, value);
  }
  else if (key == "seed")
  {
    long long const s = parse_int(key, value);
    expect(s >= 0, "seed must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  else if (key == "diagnostics")
  {
    cfg.diagnostics_path = value;
  }
  else if (key == "perturbation")
  {
    cfg.params.perturbation = parse_double(key, value);
  }
  else if (key == "cosine_initial")
  {
    cfg.params.cosine_initial = parse_bool(key, value);
  }
  else
  {
    throw validation_error("unknown setting '" + key + "'");
  }
}

void load_config_file(run_config &cfg, std::string const &path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw validation_error("cannot open config file " + path);
  }
  std::string line;
  int lineno = 0;
  while (std::getline(in, line))
  {
    ++lineno;
    auto const hash = line.find('#');
    if (hash != std::string::npos)
    {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty())
    {
      continue;
    }
    auto const eq = line.find('=');
    if (eq == std::string::npos)
    {
      throw validation_error(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
}

run_outcome run_single(run_config const &cfg, int N)
{
  cfg.validate();
  auto const start = std::chrono::steady_clock::now();
  dof_map const dofs(cfg.dims, cfg.k_poly, N, cfg.grid);
  auto const problem = make_example(cfg.example, cfg.dims, cfg.params);
  reaction_diffusion_system sys(problem, dofs, penalty_spec{cfg.sigma});

  integration_config ic;
  ic.method     = cfg.resolved_method();
  ic.dt         = cfg.dt.resolve(N);
  ic.t_final    = cfg.t_final;
  ic.krylov_dim = cfg.krylov_dim;
  ic.stop_times = cfg.snapshot_times;

  run_outcome out;
  out.dof    = dofs.size();
  auto res   = run_integration(sys, initial_state(problem, dofs), 0.0, ic);
  out.steps  = res.steps.empty() ? 0 : res.steps.back().step;
  out.U      = std::move(res.U);
  out.diagnostics = std::move(res.steps);
  if (problem.exact)
  {
    out.errors = l2_errors(out.U, cfg.t_final, problem, dofs);
  }
  out.seconds = seconds_since(start);
  if (!cfg.diagnostics_path.empty())
  {
    std::ofstream diag(cfg.diagnostics_path);
    if (!diag)
    {
      throw validation_error("cannot open diagnostics file " + cfg.diagnostics_path);
    }
    write_diagnostics_csv(diag, out.diagnostics);
  }
  return out;
}

void write_convergence_header(std::ostream &out, int species)
{
  out << "N,DOF";
  for (int s = 0; s < species; ++s)
  {
    out << ",error_s" << s << ",order_s" << s;
  }
  out << ",cpu_seconds\n";
}

void write_convergence_row(std::ostream &out, convergence_row const &row)
{
  out << row.N << ',' << row.dof;
  for (std::size_t s = 0; s < row.error.size(); ++s)
  {
    out << ',' << format_number(row.error[s]) << ',';
    if (row.order[s])
    {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.4f", *row.order[s]);
      out << buf;
    }
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", row.cpu_seconds);
  out << ',' << buf << '\n';
  out.flush();
}

std::vector<convergence_row> run_convergence(run_config const &cfg, std::ostream *csv)
{
  cfg.validate();
  auto const problem = make_example(cfg.example, cfg.dims, cfg.params);
  expect(bool(problem.exact), "convergence study needs an example with an exact solution");
  if (csv != nullptr)
  {
    write_convergence_header(*csv, problem.n_species);
  }
  std::vector<convergence_row> rows;
  for (int N = cfg.n_min; N <= cfg.n_max; ++N)
  {
    auto const run = run_single(cfg, N);
    convergence_row row;
    row.N           = N;
    row.dof         = run.dof;
    row.error       = run.errors;
    row.cpu_seconds = run.seconds;
    row.steps       = run.steps;
    row.order.resize(row.error.size());
    if (!rows.empty())
    {
      for (std::size_t s = 0; s < row.error.size(); ++s)
      {
        row.order[s] = std::log2(rows.back().error[s] / row.error[s]);
      }
    }
    if (csv != nullptr)
    {
      write_convergence_row(*csv, row);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

cfl_result find_cfl(int dims, int k_poly, int N, grid_kind grid, int rk_order,
                    std::uint64_t seed, double sigma)
{
  expect(rk_order == 2 || rk_order == 3, "CFL search supports RK2 and RK3");
  dof_map const dofs(dims, k_poly, N, grid);
  auto const problem = make_example(1, dims);
  reaction_diffusion_system sys(problem, dofs, penalty_spec{sigma});
  double const kappa = problem.kappa[0];
  double const h     = std::ldexp(1.0, -N);
  double const to_cfl = kappa * dims / (h * h);

  Vector U0 = initial_state(problem, dofs);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector noise(U0.size());
  for (auto &x : noise)
  {
    x = normal(rng);
  }
  U0 += noise * (U0.norm() / noise.norm());
  double const limit = 10.0 * U0.norm();

  cfl_result result;
  auto stable = [&](double dt) {
    ++result.trials;
    Vector U      = U0;
    int const n   = static_cast<int>(std::ceil(1.0 / dt - 1e-9));
    double t      = 0.0;
    for (int i = 0; i < n; ++i)
    {
      double const step = std::min(dt, 1.0 - t);
      U                 = step_rk_explicit(sys, rk_order, U, t, step);
      t += step;
      double const norm = U.norm();
      if (!(norm <= limit))
      {
        return false;
      }
    }
    return true;
  };

  double lo = 0.0, hi = 0.0;
  double dt = 0.001 / to_cfl;
  int expansions = 0;
  if (stable(dt))
  {
    lo = dt;
    while (true)
    {
      expect(expansions < 60, "no unstable step found within 60 doublings");
      dt *= 2.0;
      ++expansions;
      if (!stable(dt))
      {
        hi = dt;
        break;
      }
      lo = dt;
    }
  }
  else
  {
    hi = dt;
    while (true)
    {
      expect(expansions < 60, "no stable step found within 60 halvings");
      dt *= 0.5;
      ++expansions;
      if (stable(dt))
      {
        lo = dt;
        break;
      }
      hi = dt;
    }
  }
  while ((hi - lo) > 2e-4 * lo)
  {
    double const mid = 0.5 * (lo + hi);
    if (stable(mid))
    {
      lo = mid;
    }
    else
    {
      hi = mid;
    }
  }
  result.dt  = lo;
  result.cfl = round_significant(lo * to_cfl, 3);
  return result;
}

spectral_result spectral_diagnostics(int dims, int k_poly, int N, grid_kind grid, double sigma,
                                     std::uint64_t seed)
{
  dof_map const dofs(dims, k_poly, N, grid);
  expect(dofs.size() <= 100'000, "spectral diagnostics are limited to 1e5 dofs");
  csr_matrix const A = assemble_diffusion(dofs, 1.0, bc_kind::periodic, penalty_spec{sigma});
  double const h     = std::ldexp(1.0, -N);
  spectral_result out;
  out.dof = dofs.size();
  LinearOperator const opA = [&](Vector const &x, Vector &y) { A.apply(x, y); };
  auto const lam = lanczos_extreme(opA, dofs.size(), spectrum_end::smallest, 1e-6, 5000, seed);
  if (!lam.converged)
  {
    throw numerical_error("eigenvalue iteration did not converge in 5000 iterations");
  }
  LinearOperator const opB = [&](Vector const &x, Vector &y) {
    A.apply(x, y);
    y = x - h * y;
  };
  auto const low = lanczos_extreme(opB, dofs.size(), spectrum_end::smallest, 1e-6, 5000, seed + 1);
  if (!low.converged)
  {
    throw numerical_error("eigenvalue iteration did not converge in 5000 iterations");
  }
  out.lambda0    = lam.value;
  out.cond2      = (1.0 - h * lam.value) / low.value;
  out.iterations = lam.iterations + low.iterations;
  return out;
}

std::vector<krylov_row> krylov_study(run_config const &cfg, std::vector<int> const &Ms)
{
  cfg.validate();
  expect(!Ms.empty(), "Krylov study needs at least one M");
  std::vector<krylov_row> rows;
  for (int M : Ms)
  {
    expect(M >= 1, "Krylov dimension M must be at least 1");
    run_config single = cfg;
    single.krylov_dim = M;
    single.dt         = dt_rule{false, cfg.t_final};
    run_config fine   = cfg;
    fine.krylov_dim   = M;
    auto const a      = run_single(single, cfg.n_max);
    auto const b      = run_single(fine, cfg.n_max);
    expect(!a.errors.empty(), "Krylov study needs an example with an exact solution");
    rows.push_back({M, a.dof, a.errors[0], b.errors[0]});
  }
  return rows;
}

std::vector<double> lattice_values(Vector const &c, dof_map const &dofs, int n)
{
  expect(dofs.dims() == 2, "lattice sampling is two-dimensional");
  expect(n >= 1, "lattice needs at least one point per direction");
  auto const field = to_fullgrid(std::span<double const>(c.data(), dofs.size()), dofs);
  std::vector<double> out(static_cast<std::size_t>(n) * n);
  std::array<double, 2> x{};
  for (int i = 0; i < n; ++i)
  {
    for (int j = 0; j < n; ++j)
    {
      x[0]           = (i + 0.5) / n;
      x[1]           = (j + 0.5) / n;
      out[i * n + j] = field.eval(x);
    }
  }
  return out;
}

int count_local_maxima_above_mean(std::vector<double> const &v, int n)
{
  expect(static_cast<std::size_t>(n) * n == v.size(), "lattice size mismatch");
  double mean = 0.0;
  for (double x : v)
  {
    mean += x;
  }
  mean /= static_cast<double>(v.size());
  // rounding noise on a flat field is not a peak
  double const floor = mean + 1e-10 * std::max(1.0, std::abs(mean));
  int count = 0;
  for (int i = 0; i < n; ++i)
  {
    for (int j = 0; j < n; ++j)
    {
      double const c = v[i * n + j];
      if (!(c > floor))
      {
        continue;
      }
      bool peak = true;
      for (int di = -1; di <= 1 && peak; ++di)
      {
        for (int dj = -1; dj <= 1; ++dj)
        {
          if (di == 0 && dj == 0)
          {
            continue;
          }
          int const a = (i + di + n) % n, b = (j + dj + n) % n;
          if (!(c > v[a * n + b]))
          {
            peak = false;
            break;
          }
        }
      }
      count += peak ? 1 : 0;
    }
  }
  return count;
}

std::vector<snapshot_info> run_pattern(run_config const &cfg)
{
  cfg.validate();
  expect(cfg.example == 5, "pattern runs use example 5");
  int const N = cfg.n_max;
  dof_map const dofs(2, cfg.k_poly, N, cfg.grid);
  auto const problem = make_example(5, 2, cfg.params);
  reaction_diffusion_system sys(problem, dofs, penalty_spec{cfg.sigma});
  std::filesystem::create_directories(cfg.output_dir);

  std::vector<double> times = cfg.snapshot_times;
  times.push_back(0.0);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  std::vector<snapshot_info> snaps;
  auto take = [&](double t, Vector const &U) {
    Vector const activator = U.head(dofs.size());
    char name[64];
    std::snprintf(name, sizeof(name), "pattern_t%.3f.csv", t);
    snapshot_info info;
    info.t    = t;
    info.path = (std::filesystem::path(cfg.output_dir) / name).string();
    write_snapshot_csv(info.path, std::span<Vector const>(&activator, 1), dofs, cfg.lattice_points);
    auto const values = lattice_values(activator, dofs, cfg.lattice_points);
    info.min  = *std::min_element(values.begin(), values.end());
    info.max  = *std::max_element(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values)
    {
      sum += v;
    }
    info.mean         = sum / static_cast<double>(values.size());
    info.local_maxima = count_local_maxima_above_mean(values, cfg.lattice_points);
    snaps.push_back(info);
  };

  integration_config ic;
  ic.method      = cfg.resolved_method();
  ic.dt          = cfg.dt.resolve(N);
  ic.t_final     = cfg.t_final;
  ic.krylov_dim  = cfg.krylov_dim;
  ic.stop_times  = times;
  ic.blowup_norm = 1e6;
  std::size_t next = 0;
  double const tol = 1e-9;
  auto const res = run_integration(sys, initial_state(problem, dofs), 0.0, ic,
                                   [&](step_diagnostics const &d, Vector const &U) {
                                     while (next < times.size() && std::abs(d.t - times[next]) <= tol)
                                     {
                                       take(times[next], U);
                                       ++next;
                                     }
                                     return true;
                                   });
  if (!cfg.diagnostics_path.empty())
  {
    std::ofstream diag(cfg.diagnostics_path);
    write_diagnostics_csv(diag, res.steps);
  }
  return snaps;
}

} // namespace sgiif
