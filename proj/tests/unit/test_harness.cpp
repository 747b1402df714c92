#include "sgiif/harness.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace sgiif;

namespace
{
std::filesystem::path scratch_dir(std::string const &name)
{
  auto const dir = std::filesystem::temp_directory_path() / ("sgiif_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::vector<std::string> split(std::string const &line, char sep)
{
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep))
  {
    out.push_back(item);
  }
  if (!line.empty() && line.back() == sep)
  {
    out.emplace_back();
  }
  return out;
}

run_config small_heat()
{
  run_config cfg;
  cfg.example = 1;
  cfg.dims    = 1;
  cfg.k_poly  = 1;
  cfg.n_min   = 3;
  cfg.n_max   = 3;
  cfg.t_final = 0.1;
  return cfg;
}
} // namespace

TEST(DtRule, Parse)
{
  auto const a = dt_rule::parse("h");
  EXPECT_TRUE(a.relative);
  EXPECT_DOUBLE_EQ(a.resolve(4), 1.0 / 16.0);
  EXPECT_DOUBLE_EQ(dt_rule::parse("0.5h").resolve(3), 1.0 / 16.0);
  EXPECT_DOUBLE_EQ(dt_rule::parse("2*h").resolve(3), 0.25);
  auto const b = dt_rule::parse(" 0.01 ");
  EXPECT_FALSE(b.relative);
  EXPECT_DOUBLE_EQ(b.resolve(9), 0.01);
  EXPECT_THROW(dt_rule::parse("abc"), validation_error);
  EXPECT_THROW(dt_rule::parse("-1"), validation_error);
  EXPECT_THROW(dt_rule::parse(""), validation_error);
  EXPECT_THROW(dt_rule::parse("1e-3x"), validation_error);
}

TEST(RunConfig, Validation)
{
  run_config cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.n_min = 5;
  cfg.n_max = 2;
  EXPECT_THROW(cfg.validate(), validation_error);
  cfg       = run_config{};
  cfg.example = 5;
  cfg.dims    = 3;
  EXPECT_THROW(cfg.validate(), validation_error);
  cfg              = run_config{};
  cfg.krylov_dim   = 0;
  EXPECT_THROW(cfg.validate(), validation_error);
  cfg                = run_config{};
  cfg.snapshot_times = {3.0};
  EXPECT_THROW(cfg.validate(), validation_error);
  cfg       = run_config{};
  cfg.dims  = 3;
  cfg.n_max = 20;
  EXPECT_THROW(cfg.validate(), validation_error);
}

TEST(RunConfig, DefaultIntegratorFollowsDegree)
{
  run_config cfg;
  cfg.k_poly = 1;
  EXPECT_EQ(cfg.resolved_method(), integrator_kind::iif2);
  cfg.k_poly = 2;
  EXPECT_EQ(cfg.resolved_method(), integrator_kind::iif3);
  cfg.method = integrator_kind::rk3;
  EXPECT_EQ(cfg.resolved_method(), integrator_kind::rk3);
}

TEST(RunConfig, SettingsAndConfigFile)
{
  auto const dir = scratch_dir("config");
  auto const path = dir / "run.cfg";
  {
    std::ofstream f(path);
    f << "# heat run\n"
      << "example = 3\n"
      << "d = 2   # trailing comment\n"
      << "\n"
      << "k=2\n"
      << "nmin = 3\nnmax = 5\n"
      << "dt = 0.5h\n"
      << "T = 0.25\n"
      << "M = 40\n"
      << "integrator = IIF3\n"
      << "snapshots = 0.1, 0.2\n"
      << "cosine_initial = true\n";
  }
  run_config cfg;
  load_config_file(cfg, path.string());
  EXPECT_EQ(cfg.example, 3);
  EXPECT_EQ(cfg.dims, 2);
  EXPECT_EQ(cfg.k_poly, 2);
  EXPECT_EQ(cfg.n_min, 3);
  EXPECT_EQ(cfg.n_max, 5);
  EXPECT_DOUBLE_EQ(cfg.dt.resolve(2), 0.125);
  EXPECT_DOUBLE_EQ(cfg.t_final, 0.25);
  EXPECT_EQ(cfg.krylov_dim, 40);
  EXPECT_EQ(cfg.resolved_method(), integrator_kind::iif3);
  EXPECT_EQ(cfg.snapshot_times, (std::vector<double>{0.1, 0.2}));
  EXPECT_TRUE(cfg.params.cosine_initial);

  EXPECT_THROW(apply_setting(cfg, "bogus", "1"), validation_error);
  EXPECT_THROW(apply_setting(cfg, "k", "two"), validation_error);
  EXPECT_THROW(apply_setting(cfg, "k", "99999999999"), validation_error);
  {
    std::ofstream f(dir / "bad.cfg");
    f << "example 3\n";
  }
  EXPECT_THROW(load_config_file(cfg, (dir / "bad.cfg").string()), validation_error);
  EXPECT_THROW(load_config_file(cfg, (dir / "missing.cfg").string()), validation_error);
}

TEST(Convergence, SingleLevelHasEmptyOrder)
{
  std::ostringstream csv;
  auto const rows = run_convergence(small_heat(), &csv);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_FALSE(rows[0].order[0].has_value());
  EXPECT_EQ(rows[0].dof, 16);

  std::istringstream in(csv.str());
  std::string header, line, extra;
  std::getline(in, header);
  std::getline(in, line);
  EXPECT_FALSE(std::getline(in, extra));
  EXPECT_EQ(header, "N,DOF,error_s0,order_s0,cpu_seconds");
  auto const fields = split(line, ',');
  ASSERT_EQ(fields.size(), 5u);
  EXPECT_EQ(fields[0], "3");
  EXPECT_EQ(fields[1], "16");
  EXPECT_NEAR(std::stod(fields[2]), rows[0].error[0], 1e-6 * rows[0].error[0]);
  EXPECT_TRUE(fields[3].empty());
}

TEST(Convergence, OrdersFromConsecutiveRows)
{
  auto cfg  = small_heat();
  cfg.n_max = 5;
  auto const rows = run_convergence(cfg);
  ASSERT_EQ(rows.size(), 3u);
  for (std::size_t i = 1; i < rows.size(); ++i)
  {
    ASSERT_TRUE(rows[i].order[0].has_value());
    EXPECT_DOUBLE_EQ(*rows[i].order[0], std::log2(rows[i - 1].error[0] / rows[i].error[0]));
    EXPECT_GT(*rows[i].order[0], 1.5);
  }
}

TEST(Convergence, TwoSpeciesColumns)
{
  auto cfg    = small_heat();
  cfg.example = 4;
  std::ostringstream csv;
  auto const rows = run_convergence(cfg, &csv);
  ASSERT_EQ(rows[0].error.size(), 2u);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')),
            "N,DOF,error_s0,order_s0,error_s1,order_s1,cpu_seconds");
}

TEST(Convergence, DeterministicErrors)
{
  auto cfg    = small_heat();
  cfg.example = 3;
  cfg.dims    = 2;
  auto const a = run_convergence(cfg);
  auto const b = run_convergence(cfg);
  EXPECT_EQ(a[0].error, b[0].error);
}

TEST(Convergence, DiagnosticsFile)
{
  auto const dir = scratch_dir("diag");
  auto cfg       = small_heat();
  cfg.diagnostics_path = (dir / "steps.csv").string();
  auto const out       = run_single(cfg, 3);
  std::ifstream in(cfg.diagnostics_path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "step,t,norm2,newton_iters,krylov_dim_effective");
  int lines = 0;
  for (std::string l; std::getline(in, l);)
  {
    ++lines;
  }
  EXPECT_EQ(lines, out.steps + 1);
}

TEST(Cfl, MatchesRealAxisStabilityBound)
{
  // RK2 is stable on [-2, 0]: dt_max = 2 / |lambda_0(kappa A)|
  for (int N : {3, 4})
  {
    auto const cfl  = find_cfl(2, 1, N, grid_kind::sparse, 2);
    auto const eig = spectral_diagnostics(2, 1, N, grid_kind::sparse);
    double const h  = std::ldexp(1.0, -N);
    double const ratio = cfl.cfl * h * h * std::abs(eig.lambda0) / 4.0;
    EXPECT_NEAR(ratio, 1.0, 0.05) << "N = " << N;
  }
}

TEST(Cfl, Rk3AllowsLargerSteps)
{
  auto const rk2 = find_cfl(2, 1, 3, grid_kind::sparse, 2);
  auto const rk3 = find_cfl(2, 1, 3, grid_kind::sparse, 3);
  // stability intervals 2 and 2.5127
  EXPECT_NEAR(rk3.cfl / rk2.cfl, 2.5127 / 2.0, 0.05);
}

TEST(Cfl, ReproducibleAndRounded)
{
  auto const a = find_cfl(2, 1, 3, grid_kind::sparse, 2, 7);
  auto const b = find_cfl(2, 1, 3, grid_kind::sparse, 2, 7);
  EXPECT_EQ(a.cfl, b.cfl);
  EXPECT_EQ(a.trials, b.trials);
  double const scaled = a.cfl * std::pow(10.0, 2 - std::floor(std::log10(a.cfl)));
  EXPECT_NEAR(scaled, std::round(scaled), 1e-9);
  EXPECT_THROW(find_cfl(2, 1, 3, grid_kind::sparse, 4), validation_error);
}

TEST(Spectrum, MatchesDenseOracle)
{
  dof_map const dofs(2, 1, 3, grid_kind::sparse);
  Matrix const A = assemble_diffusion(dofs, 1.0, bc_kind::periodic, penalty_spec{20.0}).to_dense();
  Eigen::SelfAdjointEigenSolver<Matrix> es(A);
  double const h      = 1.0 / 8.0;
  double const lam0   = es.eigenvalues().minCoeff();
  double const lammax = es.eigenvalues().maxCoeff();
  auto const r = spectral_diagnostics(2, 1, 3, grid_kind::sparse);
  EXPECT_EQ(r.dof, 80);
  EXPECT_NEAR(r.lambda0, lam0, 1e-6 * std::abs(lam0));
  EXPECT_NEAR(r.cond2, (1.0 - h * lam0) / (1.0 - h * lammax), 1e-5 * r.cond2);
}

TEST(Spectrum, SparseInterlacesFull)
{
  for (int k : {1, 2})
  {
    auto const s = spectral_diagnostics(2, k, 3, grid_kind::sparse);
    auto const f = spectral_diagnostics(2, k, 3, grid_kind::full);
    EXPECT_GE(s.lambda0, f.lambda0 * (1.0 + 1e-6));
  }
}

TEST(Lattice, LocalMaxima)
{
  int const n = 8;
  std::vector<double> flat(n * n, 1.0);
  EXPECT_EQ(count_local_maxima_above_mean(flat, n), 0);

  auto one = flat;
  one[3 * n + 4] = 2.0;
  EXPECT_EQ(count_local_maxima_above_mean(one, n), 1);

  // periodic neighbourhood: a corner peak is seen once
  auto corner = flat;
  corner[0]   = 3.0;
  EXPECT_EQ(count_local_maxima_above_mean(corner, n), 1);
  corner[n * n - 1] = 3.0; // diagonal neighbour across the wrap: equal values are not strict
  EXPECT_EQ(count_local_maxima_above_mean(corner, n), 0);

  // a peak below the mean does not count
  std::vector<double> dips(n * n, 5.0);
  for (int i = 0; i < n * n; i += 2)
  {
    dips[i] = 0.0;
  }
  dips[0] = 0.5;
  EXPECT_EQ(count_local_maxima_above_mean(dips, n), 0);

  EXPECT_THROW(count_local_maxima_above_mean(flat, n + 1), validation_error);
}

TEST(Lattice, ValuesOfProjection)
{
  dof_map const dofs(2, 2, 3, grid_kind::sparse);
  auto const c = project_l2([](std::span<double const> x) { return 1.0 + x[0] - 2.0 * x[1] * x[1]; }, dofs);
  int const n   = 10;
  auto const v  = lattice_values(c, dofs, n);
  ASSERT_EQ(v.size(), 100u);
  for (int i = 0; i < n; ++i)
  {
    for (int j = 0; j < n; ++j)
    {
      double const x = (i + 0.5) / n, y = (j + 0.5) / n;
      EXPECT_NEAR(v[i * n + j], 1.0 + x - 2.0 * y * y, 1e-12);
    }
  }
}

TEST(Pattern, ConstantStateStaysConstant)
{
  auto const dir = scratch_dir("pattern");
  run_config cfg;
  cfg.example             = 5;
  cfg.dims                = 2;
  cfg.k_poly              = 1;
  cfg.n_min = cfg.n_max   = 3;
  cfg.t_final             = 0.25;
  cfg.params.perturbation = 0.0;
  cfg.snapshot_times      = {0.1, 0.25};
  cfg.lattice_points      = 16;
  cfg.output_dir          = dir.string();
  auto const snaps        = run_pattern(cfg);
  ASSERT_EQ(snaps.size(), 3u);
  EXPECT_DOUBLE_EQ(snaps[0].t, 0.0);
  EXPECT_DOUBLE_EQ(snaps[2].t, 0.25);
  for (auto const &s : snaps)
  {
    EXPECT_LT(s.max - s.min, 1e-8);
    EXPECT_NEAR(s.mean, 0.9, 1e-8);
    EXPECT_EQ(s.local_maxima, 0);
    ASSERT_TRUE(std::filesystem::exists(s.path));
  }
  std::ifstream in(snaps[1].path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "x1,x2,species_0");
  int rows = 0;
  for (std::string l; std::getline(in, l);)
  {
    ++rows;
  }
  EXPECT_EQ(rows, 256);
}

TEST(Pattern, InitialBumpPeak)
{
  auto const dir = scratch_dir("pattern0");
  run_config cfg;
  cfg.example           = 5;
  cfg.k_poly            = 2;
  cfg.n_min = cfg.n_max = 4;
  cfg.t_final           = 0.0;
  cfg.lattice_points    = 48; // lattice point (16.5/48, 24.5/48) is near (1/3, 1/2)
  cfg.output_dir        = dir.string();
  auto const snaps      = run_pattern(cfg);
  ASSERT_EQ(snaps.size(), 1u);
  EXPECT_NEAR(snaps[0].max, 0.9010, 2e-4);
  EXPECT_EQ(snaps[0].local_maxima, 1);
}

TEST(Pattern, RequiresExampleFive)
{
  run_config cfg;
  EXPECT_THROW(run_pattern(cfg), validation_error);
}

TEST(KrylovStudy, RowsPerDimension)
{
  auto cfg    = small_heat();
  cfg.t_final = 0.3;
  auto const rows = krylov_study(cfg, {4, 16});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].M, 4);
  EXPECT_EQ(rows[1].M, 16);
  EXPECT_GT(rows[1].error_fine_step, 0.0);
  EXPECT_NEAR(rows[1].error_single_step, rows[1].error_fine_step, 0.05 * rows[1].error_fine_step);
  EXPECT_THROW(krylov_study(cfg, {}), validation_error);
}
