#include "sgiif/problems.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace sgiif
{
namespace
{
double prod_sin(std::span<double const> x)
{
  double p = 1.0;
  for (double xm : x)
  {
    p *= std::sin(2.0 * std::numbers::pi * xm);
  }
  return p;
}

double prod_cos(std::span<double const> x)
{
  double p = 1.0;
  for (double xm : x)
  {
    p *= std::cos(2.0 * std::numbers::pi * xm);
  }
  return p;
}

double diffusion_constant(int d) { return 1.0 / (4.0 * d * std::numbers::pi * std::numbers::pi); }

std::int64_t cell_count(cell_quadrature const &q)
{
  std::int64_t n = 1;
  for (int m = 0; m < q.dims(); ++m)
  {
    n *= q.cells_per_dim();
  }
  return n;
}
} // namespace

problem_spec make_example(int id, int dims, example_params const &params)
{
  expect(id >= 1 && id <= 5, "example id must be 1..5");
  expect(dims >= 1 && dims <= 3, "examples are defined for d = 1..3");
  expect(id != 5 || dims == 2, "example 5 is two-dimensional");
  problem_spec p;
  p.id        = id;
  p.dims      = dims;
  double const k = diffusion_constant(dims);
  switch (id)
  {
  case 1:
    p.name    = "heat";
    p.kappa   = {k};
    p.bc      = boundary_condition::periodic();
    p.initial = [](int, std::span<double const> x) { return prod_sin(x); };
    p.exact   = [](int, std::span<double const> x, double t) { return std::exp(-t) * prod_sin(x); };
    break;
  case 2:
    p.name            = "linear_reaction";
    p.kappa           = {k};
    p.bc              = boundary_condition::periodic();
    p.linear_reaction = Matrix::Constant(1, 1, 1.0);
    p.forcing.push_back({0, [](double t) { return -std::exp(-t); }, prod_sin});
    p.initial = [](int, std::span<double const> x) { return prod_sin(x); };
    p.exact   = [](int, std::span<double const> x, double t) { return std::exp(-t) * prod_sin(x); };
    break;
  case 3:
    p.name     = "nonlinear_reaction";
    p.kappa    = {k};
    p.bc       = boundary_condition::dirichlet_zero();
    p.reaction = [](std::span<double const> u, std::span<double const>, double,
                    std::span<double> f) { f[0] = u[0] * u[0]; };
    p.reaction_jacobian = [](std::span<double const> u, std::span<double const>, double,
                             std::span<double> j) { j[0] = 2.0 * u[0]; };
    p.forcing.push_back({0, [](double t) { return -std::exp(-2.0 * t); },
                         [](std::span<double const> x) {
                           double const s = prod_sin(x);
                           return s * s;
                         }});
    p.initial = [](int, std::span<double const> x) { return prod_sin(x); };
    p.exact   = [](int, std::span<double const> x, double t) { return std::exp(-t) * prod_sin(x); };
    break;
  case 4:
  {
    double const a = params.a, b = params.b, c = params.c;
    expect(a >= 0.0 && b != c, "example 4 needs a >= 0 and b != c");
    p.name      = "stiff_system";
    p.n_species = 2;
    p.kappa     = {k * a, k * a};
    p.bc        = boundary_condition::periodic();
    Matrix L(2, 2);
    L << -b, 1.0, 0.0, -c;
    p.linear_reaction = L;
    p.exact = [a, b, c](int s, std::span<double const> x, double t) {
      double const shape = prod_cos(x);
      if (s == 0)
      {
        return (std::exp(-(b + a) * t) + std::exp(-(c + a) * t)) * shape;
      }
      return (b - c) * std::exp(-(c + a) * t) * shape;
    };
    if (params.cosine_initial)
    {
      p.initial = [](int s, std::span<double const> x) { return (s == 0 ? 2.0 : 1.0) * prod_cos(x); };
    }
    else
    {
      auto exact = p.exact;
      p.initial  = [exact](int s, std::span<double const> x) { return exact(s, x, 0.0); };
    }
    break;
  }
  case 5:
  {
    double constexpr rate = 100.0, a = 0.1305, b = 0.7695;
    double const bump     = params.perturbation;
    p.name                = "schnakenberg";
    p.n_species           = 2;
    p.kappa               = {0.05, 1.0};
    p.bc                  = boundary_condition::periodic();
    p.reaction = [](std::span<double const> u, std::span<double const>, double,
                    std::span<double> f) {
      double const u2v = u[0] * u[0] * u[1];
      f[0]             = rate * (a - u[0] + u2v);
      f[1]             = rate * (b - u2v);
    };
    p.reaction_jacobian = [](std::span<double const> u, std::span<double const>, double,
                             std::span<double> j) {
      j[0] = rate * (-1.0 + 2.0 * u[0] * u[1]);
      j[1] = rate * u[0] * u[0];
      j[2] = -rate * 2.0 * u[0] * u[1];
      j[3] = -rate * u[0] * u[0];
    };
    p.initial = [bump](int s, std::span<double const> x) {
      if (s == 0)
      {
        double const dx = x[0] - 1.0 / 3.0, dy = x[1] - 0.5;
        return a + b + bump * std::exp(-100.0 * (dx * dx + dy * dy));
      }
      return b / ((a + b) * (a + b));
    };
    break;
  }
  }
  return p;
}

reaction_evaluator::reaction_evaluator(problem_spec const &problem, dof_map const &dofs,
                                       penalty_spec penalty)
    : problem_(&problem), dofs_(&dofs), penalty_(penalty),
      quad_(dofs.dims(), dofs.k_poly(), dofs.max_level(), dofs.k_poly() + 2)
{
  expect(problem.dims == dofs.dims(), "problem and dof map dimensions differ");
  expect(static_cast<int>(problem.kappa.size()) == problem.n_species,
         "one diffusion constant per species is required");
  if (problem.linear_reaction)
  {
    expect(problem.linear_reaction->rows() == problem.n_species &&
               problem.linear_reaction->cols() == problem.n_species,
           "linear reaction matrix has the wrong shape");
  }
  if (problem.reaction && !problem.linear_reaction)
  {
    check_full_grid_budget(dofs.dims(), dofs.k_poly(), dofs.max_level());
  }
  for (auto const &f : problem.forcing)
  {
    expect(f.species >= 0 && f.species < problem.n_species, "forcing species out of range");
    forcing_shapes_.push_back(project_l2(f.shape, dofs));
  }
}

bool reaction_evaluator::active() const
{
  return problem_->has_reaction() || !problem_->forcing.empty() ||
         (problem_->bc.kind == bc_kind::dirichlet && bool(problem_->bc.g));
}

std::vector<full_grid_field> reaction_evaluator::reconstruct(Vector const &U) const
{
  std::int64_t const n = dofs_->size();
  std::vector<full_grid_field> fields;
  for (int s = 0; s < problem_->n_species; ++s)
  {
    fields.push_back(to_fullgrid(std::span<double const>(U.data() + s * n, n), *dofs_));
  }
  return fields;
}

Vector reaction_evaluator::collect(std::vector<std::vector<double>> &fields) const
{
  std::int64_t const n = dofs_->size();
  Vector out(problem_->n_species * n);
  for (int s = 0; s < problem_->n_species; ++s)
  {
    full_grid_field g;
    g.dims      = dofs_->dims();
    g.k_poly    = dofs_->k_poly();
    g.max_level = dofs_->max_level();
    g.data      = std::move(fields[s]);
    out.segment(s * n, n) = from_fullgrid(g, *dofs_);
  }
  return out;
}

Vector reaction_evaluator::linear_apply(Vector const &U) const
{
  std::int64_t const n = dofs_->size();
  int const ns         = problem_->n_species;
  Matrix const &L      = *problem_->linear_reaction;
  Vector out           = Vector::Zero(U.size());
  for (int s = 0; s < ns; ++s)
  {
    for (int r = 0; r < ns; ++r)
    {
      if (L(s, r) != 0.0)
      {
        out.segment(s * n, n) += L(s, r) * U.segment(r * n, n);
      }
    }
  }
  return out;
}

// Reconstructs every species at the Gauss points of each finest cell, calls
// kernel(cell, x, point, u, f) and projects f back when `out` is given.
template<class Kernel>
void reaction_evaluator::pointwise_pass(std::vector<full_grid_field> const &in, double t,
                                        std::vector<std::vector<double>> *out,
                                        Kernel const &kernel) const
{
  int const ns            = problem_->n_species;
  int const d             = dofs_->dims();
  std::int64_t const pts  = quad_.points_per_cell();
  std::int64_t const mpc  = quad_.modes_per_cell();
  std::int64_t const cells = cell_count(quad_);
  if (out != nullptr)
  {
    out->assign(ns, std::vector<double>(dofs_->full_size(), 0.0));
  }
  // node offsets of every point inside a cell
  std::vector<double> nodes(pts * d);
  for (std::int64_t p = 0; p < pts; ++p)
  {
    std::int64_t rest = p;
    for (int m = d - 1; m >= 0; --m)
    {
      nodes[p * d + m] = quad_.rule().nodes[rest % quad_.points()];
      rest /= quad_.points();
    }
  }
  double const h = quad_.cell_width();
  bool failed    = false;
  std::string failure;

#pragma omp parallel
  {
    std::vector<double> block(mpc), work(2 * std::max(pts, mpc));
    std::vector<double> values(ns * pts), rates(ns * pts);
    std::vector<double> u(ns), f(ns), x(d);
    std::vector<int> cell(d);
#pragma omp for schedule(static)
    for (std::int64_t c = 0; c < cells; ++c)
    {
      cell_from_flat(c, d, quad_.cells_per_dim(), cell);
      for (int s = 0; s < ns; ++s)
      {
        quad_.gather(in[s].data, cell, block);
        quad_.to_points(block, std::span<double>(values.data() + s * pts, pts), work);
      }
      for (std::int64_t p = 0; p < pts; ++p)
      {
        for (int m = 0; m < d; ++m)
        {
          x[m] = (cell[m] + nodes[p * d + m]) * h;
        }
        for (int s = 0; s < ns; ++s)
        {
          u[s] = values[s * pts + p];
        }
        kernel(c, std::span<double const>(x), p, std::span<double const>(u), std::span<double>(f));
        if (out == nullptr)
        {
          continue;
        }
        for (int s = 0; s < ns; ++s)
        {
          if (!std::isfinite(f[s]))
          {
#pragma omp critical(sgiif_reaction_failure)
            if (!failed)
            {
              failed = true;
              std::ostringstream msg;
              msg << "reaction value for species " << s << " is not finite at x = (";
              for (int m = 0; m < d; ++m)
              {
                msg << (m ? ", " : "") << x[m];
              }
              msg << "), t = " << t;
              failure = msg.str();
            }
          }
          rates[s * pts + p] = f[s];
        }
      }
      if (out == nullptr)
      {
        continue;
      }
      for (int s = 0; s < ns; ++s)
      {
        quad_.to_modes(std::span<double const>(rates.data() + s * pts, pts), block, work);
        quad_.scatter(block, cell, (*out)[s]);
      }
    }
  }
  if (failed)
  {
    throw numerical_error(failure);
  }
}

Vector reaction_evaluator::evaluate(Vector const &U, double t) const
{
  std::int64_t const n = dofs_->size();
  expect(U.size() == problem_->n_species * n, "reaction: state vector has the wrong size");
  Vector out = Vector::Zero(U.size());
  if (problem_->linear_reaction)
  {
    out = linear_apply(U);
  }
  else if (problem_->reaction)
  {
    std::vector<std::vector<double>> rates;
    auto const &react = problem_->reaction;
    pointwise_pass(reconstruct(U), t, &rates,
                   [&](std::int64_t, std::span<double const> x, std::int64_t,
                       std::span<double const> u, std::span<double> f) { react(u, x, t, f); });
    out = collect(rates);
  }
  for (std::size_t i = 0; i < forcing_shapes_.size(); ++i)
  {
    auto const &term = problem_->forcing[i];
    out.segment(term.species * n, n) += term.amplitude(t) * forcing_shapes_[i];
  }
  if (problem_->bc.kind == bc_kind::dirichlet && problem_->bc.g)
  {
    for (int s = 0; s < problem_->n_species; ++s)
    {
      out.segment(s * n, n) += dirichlet_load(*dofs_, problem_->bc, problem_->kappa[s], penalty_, t);
    }
  }
  return out;
}

void reaction_evaluator::linearize(Vector const &U, double t)
{
  has_cache_ = true;
  if (problem_->linear_reaction || !problem_->reaction)
  {
    return;
  }
  expect(bool(problem_->reaction_jacobian), "reaction Jacobian is not available");
  int const ns           = problem_->n_species;
  std::int64_t const pts = quad_.points_per_cell();
  jac_cache_.assign(cell_count(quad_) * pts * ns * ns, 0.0);
  auto const &jac = problem_->reaction_jacobian;
  pointwise_pass(reconstruct(U), t, nullptr,
                 [&](std::int64_t c, std::span<double const> x, std::int64_t p,
                     std::span<double const> u, std::span<double> f) {
                   jac(u, x, t,
                       std::span<double>(jac_cache_.data() + (c * pts + p) * ns * ns, ns * ns));
                   (void)f;
                 });
}

Vector reaction_evaluator::jacobian_apply(Vector const &w) const
{
  expect(w.size() == problem_->n_species * dofs_->size(),
         "Jacobian action: vector has the wrong size");
  if (problem_->linear_reaction)
  {
    return linear_apply(w);
  }
  if (!problem_->reaction)
  {
    return Vector::Zero(w.size());
  }
  expect(has_cache_, "Jacobian action requested before linearize");
  int const ns           = problem_->n_species;
  std::int64_t const pts = quad_.points_per_cell();
  std::vector<std::vector<double>> out;
  pointwise_pass(reconstruct(w), 0.0, &out,
                 [&](std::int64_t c, std::span<double const>, std::int64_t p,
                     std::span<double const> v, std::span<double> f) {
                   double const *j = jac_cache_.data() + (c * pts + p) * ns * ns;
                   for (int s = 0; s < ns; ++s)
                   {
                     double acc = 0.0;
                     for (int r = 0; r < ns; ++r)
                     {
                       acc += j[s * ns + r] * v[r];
                     }
                     f[s] = acc;
                   }
                 });
  return collect(out);
}

Vector reaction_evaluator::jacobian_apply(Vector const &U, Vector const &w, double t) const
{
  reaction_evaluator copy(*this);
  copy.linearize(U, t);
  return copy.jacobian_apply(w);
}

reaction_diffusion_system::reaction_diffusion_system(problem_spec problem, dof_map const &dofs,
                                                     penalty_spec penalty)
    : problem_(std::move(problem)), dofs_(&dofs),
      laplacian_(assemble_diffusion(dofs, 1.0, problem_.bc.kind, penalty)),
      reaction_(problem_, dofs, penalty)
{
  for (double k : problem_.kappa)
  {
    expect(k >= 0.0 && std::isfinite(k), "diffusion constants must be non-negative");
  }
}

void reaction_diffusion_system::apply_linear(int s, Vector const &x, Vector &y) const
{
  laplacian_.apply(x, y);
  y *= problem_.kappa[s];
}

Vector initial_state(problem_spec const &problem, dof_map const &dofs)
{
  expect(bool(problem.initial), "problem has no initial data");
  std::int64_t const n = dofs.size();
  Vector U(problem.n_species * n);
  for (int s = 0; s < problem.n_species; ++s)
  {
    U.segment(s * n, n) =
        project_l2([&](std::span<double const> x) { return problem.initial(s, x); }, dofs);
  }
  return U;
}

Vector exact_state(problem_spec const &problem, dof_map const &dofs, double t)
{
  expect(bool(problem.exact), "problem has no exact solution");
  std::int64_t const n = dofs.size();
  Vector U(problem.n_species * n);
  for (int s = 0; s < problem.n_species; ++s)
  {
    U.segment(s * n, n) =
        project_l2([&](std::span<double const> x) { return problem.exact(s, x, t); }, dofs);
  }
  return U;
}

Vector eval_reaction(Vector const &U, double t, problem_spec const &problem, dof_map const &dofs)
{
  reaction_evaluator const r(problem, dofs);
  return r.evaluate(U, t);
}

Vector reaction_jacobian_matvec(Vector const &U, Vector const &w, double t,
                                problem_spec const &problem, dof_map const &dofs)
{
  reaction_evaluator const r(problem, dofs);
  return r.jacobian_apply(U, w, t);
}

std::vector<double> l2_errors(Vector const &U, double t, problem_spec const &problem,
                              dof_map const &dofs)
{
  expect(bool(problem.exact), "l2_error: problem has no exact solution");
  std::int64_t const n = dofs.size();
  expect(U.size() == problem.n_species * n, "l2_error: state vector has the wrong size");
  int const d = dofs.dims();
  cell_quadrature const quad(d, dofs.k_poly(), dofs.max_level(), dofs.k_poly() + 3);
  std::int64_t const pts   = quad.points_per_cell();
  std::int64_t const mpc   = quad.modes_per_cell();
  std::int64_t const cells = cell_count(quad);
  std::vector<double> weight(pts);
  double const volume = std::pow(quad.cell_width(), d);
  for (std::int64_t p = 0; p < pts; ++p)
  {
    std::int64_t rest = p;
    double w          = volume;
    for (int m = 0; m < d; ++m)
    {
      w *= quad.rule().weights[rest % quad.points()];
      rest /= quad.points();
    }
    weight[p] = w;
  }
  std::vector<double> errors;
  for (int s = 0; s < problem.n_species; ++s)
  {
    auto const field = to_fullgrid(std::span<double const>(U.data() + s * n, n), dofs);
    double sum       = 0.0;
#pragma omp parallel reduction(+ : sum)
    {
      std::vector<double> block(mpc), values(pts), work(2 * std::max(pts, mpc)), x(d);
      std::vector<int> cell(d);
#pragma omp for schedule(static)
      for (std::int64_t c = 0; c < cells; ++c)
      {
        cell_from_flat(c, d, quad.cells_per_dim(), cell);
        quad.gather(field.data, cell, block);
        quad.to_points(block, values, work);
        for (std::int64_t p = 0; p < pts; ++p)
        {
          quad.point_coords(cell, p, x);
          double const e = values[p] - problem.exact(s, x, t);
          sum += weight[p] * e * e;
        }
      }
    }
    errors.push_back(std::sqrt(sum));
  }
  return errors;
}

double l2_error(Vector const &U, double t, problem_spec const &problem, dof_map const &dofs,
                int species)
{
  expect(species >= 0 && species < problem.n_species, "l2_error: species out of range");
  return l2_errors(U, t, problem, dofs)[species];
}

} // namespace sgiif
