#include "sgiif/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>

using namespace sgiif;

namespace
{
struct flag
{
  char const *name; // without the leading dashes
  char const *key;  // run_config setting
  char const *help;
};

// Flags shared by the subcommands; each one maps onto a config key.
flag const k_example{"example", "example", "example number 1..5"};
flag const k_dims{"d", "d", "spatial dimension"};
flag const k_k{"k", "k", "polynomial degree"};
flag const k_nmin{"nmin", "nmin", "first mesh level"};
flag const k_nmax{"nmax", "nmax", "last mesh level"};
flag const k_level{"N", "N", "single mesh level (sets nmin = nmax)"};
flag const k_grid{"grid", "grid", "sparse or full"};
flag const k_dt{"dt", "dt", "time step: h, 0.5h, 2*h or a number"};
flag const k_M{"M", "M", "Krylov subspace dimension"};
flag const k_T{"T", "T", "final time"};
flag const k_integrator{"integrator", "integrator", "iif2, iif3, rk2 or rk3"};
flag const k_sigma{"sigma", "sigma", "interior penalty parameter"};
flag const k_seed{"seed", "seed", "seed for random start vectors"};
flag const k_snapshots{"snapshots", "snapshots", "comma separated snapshot times"};
flag const k_lattice{"lattice", "lattice", "plotting lattice points per direction"};
flag const k_diag{"diagnostics", "diagnostics", "per-step diagnostics CSV (single level)"};
flag const k_perturbation{"perturbation", "perturbation", "example 5 bump amplitude"};

class subcommand
{
public:
  subcommand(CLI::App &app, std::string const &name, std::string const &description)
      : app_(app.add_subcommand(name, description))
  {
    app_->add_option("--config", config_path_, "key = value config file (flags override it)")
        ->check(CLI::ExistingFile);
  }

  subcommand &with(flag const &f)
  {
    auto *opt = app_->add_option(std::string("--") + f.name, values_[f.key], f.help);
    given_.emplace_back(opt, f.key);
    return *this;
  }

  CLI::App *app() const { return app_; }

  /// Defaults, then the config file, then explicit flags in declaration order.
  void configure(run_config &cfg) const
  {
    if (!config_path_.empty())
    {
      load_config_file(cfg, config_path_);
    }
    for (auto const &[opt, key] : given_)
    {
      if (opt->count() > 0)
      {
        apply_setting(cfg, key, values_.at(key));
      }
    }
  }

private:
  CLI::App *app_;
  std::string config_path_;
  std::map<std::string, std::string> values_;
  std::vector<std::pair<CLI::Option *, std::string>> given_;
};

/// Output stream: a file when a path is given, stdout otherwise.
class output
{
public:
  explicit output(std::string const &path)
  {
    if (!path.empty() && path != "-")
    {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_)
      {
        throw validation_error("cannot open output file " + path);
      }
    }
  }
  std::ostream &stream() { return file_ ? *file_ : std::cout; }

private:
  std::unique_ptr<std::ofstream> file_;
};

std::string sci(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6e", v);
  return buf;
}

std::string fixed(double v, char const *fmt)
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}
} // namespace

int main(int argc, char **argv)
{
  apply_thread_limit();

  CLI::App app{"Sparse grid IPDG with Krylov implicit integration factor methods"};
  app.require_subcommand(1);

  std::string converge_out, cfl_out, spectrum_out, krylov_out, pattern_summary;
  int rk_order = 2;
  std::vector<int> Ms{10, 25, 100, 250, 500};
  bool cosine_initial = false;

  subcommand converge(app, "converge", "L2 errors and orders over mesh levels");
  converge.with(k_example).with(k_dims).with(k_k).with(k_nmin).with(k_nmax).with(k_level)
      .with(k_grid).with(k_dt).with(k_M).with(k_T).with(k_integrator).with(k_sigma).with(k_diag);
  converge.app()->add_option("--out", converge_out, "CSV output path (default stdout)");
  converge.app()->add_flag("--cosine-initial", cosine_initial,
                           "example 4: start from v(x,0) = prod cos(2 pi x_i) instead of the exact solution");

  subcommand cfl(app, "cfl", "numerical CFL numbers of explicit RK for the heat example");
  cfl.with(k_dims).with(k_k).with(k_nmin).with(k_nmax).with(k_level).with(k_grid).with(k_sigma)
      .with(k_seed);
  cfl.app()->add_option("--rk", rk_order, "RK order (2 or 3)")->check(CLI::IsMember({2, 3}));
  cfl.app()->add_option("--out", cfl_out, "CSV output path (default stdout)");

  subcommand spectrum(app, "spectrum", "extreme eigenvalue and condition number of the diffusion matrix");
  spectrum.with(k_dims).with(k_k).with(k_nmin).with(k_nmax).with(k_level).with(k_grid)
      .with(k_sigma).with(k_seed);
  spectrum.app()->add_option("--out", spectrum_out, "CSV output path (default stdout)");

  subcommand pattern(app, "pattern", "Schnakenberg pattern formation snapshots");
  pattern.with(k_k).with(k_level).with(k_grid).with(k_dt).with(k_M).with(k_T).with(k_integrator)
      .with(k_sigma).with(k_snapshots).with(k_lattice).with(k_diag).with(k_perturbation);
  std::string pattern_dir = "pattern_out";
  pattern.app()->add_option("--out", pattern_dir, "directory for snapshot CSV files");
  pattern.app()->add_option("--summary", pattern_summary, "summary CSV path (default stdout)");

  subcommand krylov(app, "krylov-study", "heat example errors against the Krylov dimension");
  krylov.with(k_example).with(k_dims).with(k_k).with(k_level).with(k_grid).with(k_dt).with(k_T)
      .with(k_integrator).with(k_sigma);
  krylov.app()->add_option("--Ms", Ms, "Krylov dimensions")->delimiter(',');
  krylov.app()->add_option("--out", krylov_out, "CSV output path (default stdout)");

  try
  {
    app.parse(argc, argv);
  }
  catch (CLI::ParseError const &e)
  {
    if (e.get_exit_code() == 0)
    {
      return app.exit(e);
    }
    std::cerr << "error: " << e.what() << "\n\n";
    auto const used = app.get_subcommands();
    std::cerr << (used.empty() ? app.help() : used.front()->help());
    return 2;
  }

  try
  {
    if (converge.app()->parsed())
    {
      run_config cfg;
      cfg.params.cosine_initial = cosine_initial;
      converge.configure(cfg);
      output out(converge_out);
      run_convergence(cfg, &out.stream());
    }
    else if (cfl.app()->parsed() || spectrum.app()->parsed())
    {
      bool const is_cfl = cfl.app()->parsed();
      run_config cfg;
      cfg.n_min = cfg.n_max = 3;
      (is_cfl ? cfl : spectrum).configure(cfg);
      cfg.validate();
      output out(is_cfl ? cfl_out : spectrum_out);
      auto &os = out.stream();
      os << (is_cfl ? "N,DOF,grid,k,rk,cfl\n" : "N,DOF,grid,k,lambda0,cond2\n");
      for (int N = cfg.n_min; N <= cfg.n_max; ++N)
      {
        auto const dof = dof_map::count(cfg.dims, cfg.k_poly, N, cfg.grid);
        os << N << ',' << dof << ',' << to_string(cfg.grid) << ',' << cfg.k_poly << ',';
        if (is_cfl)
        {
          auto const r = find_cfl(cfg.dims, cfg.k_poly, N, cfg.grid, rk_order, cfg.seed, cfg.sigma);
          os << rk_order << ',' << fixed(r.cfl, "%.3g") << '\n';
        }
        else
        {
          auto const r = spectral_diagnostics(cfg.dims, cfg.k_poly, N, cfg.grid, cfg.sigma, cfg.seed);
          os << sci(r.lambda0) << ',' << sci(r.cond2) << '\n';
        }
        os.flush();
      }
    }
    else if (pattern.app()->parsed())
    {
      run_config cfg;
      cfg.example        = 5;
      cfg.dims           = 2;
      cfg.k_poly         = 2;
      cfg.n_min = cfg.n_max = 8;
      cfg.krylov_dim     = 100;
      cfg.t_final        = 1.5;
      cfg.method         = integrator_kind::iif3;
      cfg.snapshot_times = {0.5, 0.6, 0.7, 0.8, 1.0, 1.5};
      pattern.configure(cfg);
      cfg.output_dir = pattern_dir;
      auto const snaps = run_pattern(cfg);
      output out(pattern_summary);
      auto &os = out.stream();
      os << "t,min,max,mean,local_maxima,path\n";
      for (auto const &s : snaps)
      {
        os << fixed(s.t, "%.4f") << ',' << sci(s.min) << ',' << sci(s.max) << ',' << sci(s.mean)
           << ',' << s.local_maxima << ',' << s.path << '\n';
      }
    }
    else if (krylov.app()->parsed())
    {
      run_config cfg;
      cfg.example = 1;
      cfg.dims    = 2;
      cfg.k_poly  = 1;
      cfg.n_min = cfg.n_max = 7;
      cfg.t_final = 0.6;
      krylov.configure(cfg);
      output out(krylov_out);
      auto &os = out.stream();
      os << "M,DOF,error_dt_T,error_dt_rule\n";
      for (int M : Ms)
      {
        auto const rows = krylov_study(cfg, {M});
        os << M << ',' << rows[0].dof << ',' << sci(rows[0].error_single_step) << ','
           << sci(rows[0].error_fine_step) << '\n';
        os.flush();
      }
    }
  }
  catch (validation_error const &e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  catch (numerical_error const &e)
  {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  }
  catch (std::exception const &e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
