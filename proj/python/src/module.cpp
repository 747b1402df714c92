#include "sgiif/harness.hpp"
#include "sgiif/operator_assembly.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/eigen.h>

namespace py = pybind11;
using namespace sgiif;

namespace
{
run_config make_config(py::kwargs const &kw)
{
  run_config cfg;
  for (auto const &[k, v] : kw)
  {
    apply_setting(cfg, py::str(k), py::str(v));
  }
  return cfg;
}
} // namespace

PYBIND11_MODULE(_sgiif, m)
{
  m.doc() = "Sparse grid IPDG discretisation with Krylov IIF time stepping";

  py::register_exception<validation_error>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<numerical_error>(m, "NumericalError", PyExc_RuntimeError);

  m.def("dof_count", [](int d, int k, int N, std::string const &grid) {
        return dof_map::count(d, k, N, parse_grid_kind(grid));
      },
      py::arg("d"), py::arg("k"), py::arg("N"), py::arg("grid") = "sparse");

  m.def("iif_coefficients", &iif_coefficients, py::arg("r"));

  m.def("diffusion_matrix",
        [](int d, int k, int N, std::string const &grid, double kappa, double sigma) {
          dof_map const dofs(d, k, N, parse_grid_kind(grid));
          return assemble_diffusion(dofs, kappa, bc_kind::periodic, penalty_spec{sigma}).to_dense();
        },
        py::arg("d"), py::arg("k"), py::arg("N"), py::arg("grid") = "sparse",
        py::arg("kappa") = 1.0, py::arg("sigma") = 20.0,
        "Dense periodic diffusion matrix (small problems only).");

  m.def("run",
        [](int N, py::kwargs const &kw) {
          auto const cfg = make_config(kw);
          auto out       = run_single(cfg, N);
          py::dict r;
          r["dof"]     = out.dof;
          r["steps"]   = out.steps;
          r["errors"]  = out.errors;
          r["seconds"] = out.seconds;
          r["U"]       = out.U;
          return r;
        },
        py::arg("N"), "Single run; settings as keyword arguments (example=1, d=2, k=1, dt='h', T=2, ...).");

  m.def("converge",
        [](py::kwargs const &kw) {
          auto const rows = run_convergence(make_config(kw));
          py::list out;
          for (auto const &row : rows)
          {
            py::dict r;
            r["N"]           = row.N;
            r["dof"]         = row.dof;
            r["error"]       = row.error;
            r["order"]       = row.order;
            r["cpu_seconds"] = row.cpu_seconds;
            out.append(r);
          }
          return out;
        });

  m.def("find_cfl",
        [](int d, int k, int N, std::string const &grid, int rk, std::uint64_t seed, double sigma) {
          return find_cfl(d, k, N, parse_grid_kind(grid), rk, seed, sigma).cfl;
        },
        py::arg("d"), py::arg("k"), py::arg("N"), py::arg("grid") = "sparse", py::arg("rk") = 2,
        py::arg("seed") = 1, py::arg("sigma") = 20.0);

  m.def("spectrum",
        [](int d, int k, int N, std::string const &grid, double sigma, std::uint64_t seed) {
          auto const r = spectral_diagnostics(d, k, N, parse_grid_kind(grid), sigma, seed);
          return py::make_tuple(r.lambda0, r.cond2);
        },
        py::arg("d"), py::arg("k"), py::arg("N"), py::arg("grid") = "sparse",
        py::arg("sigma") = 20.0, py::arg("seed") = 1, "Returns (lambda0, cond2(I - h A)).");

  m.def("count_local_maxima", &count_local_maxima_above_mean, py::arg("values"), py::arg("n"));
}
