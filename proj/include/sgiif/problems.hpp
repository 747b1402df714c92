#pragma once

#include "sgiif/common.hpp"
#include "sgiif/integrators.hpp"
#include "sgiif/operator_assembly.hpp"
#include "sgiif/sparse_space.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sgiif
{
/// Source term amplitude(t) * shape(x) acting on one species.
struct forcing_term
{
  int species = 0;
  std::function<double(double t)> amplitude;
  point_function shape;
};

/// Pointwise reaction: rates f(u, x, t) for all species at one point.
using reaction_function = std::function<void(std::span<double const> u,
                                             std::span<double const> x, double t,
                                             std::span<double> f)>;
/// Row-major species Jacobian df_s/du_r at one point.
using reaction_jacobian_function = std::function<void(std::span<double const> u,
                                                      std::span<double const> x, double t,
                                                      std::span<double> jac)>;

struct problem_spec
{
  int id        = 0;
  std::string name;
  int dims      = 2;
  int n_species = 1;
  std::vector<double> kappa;
  boundary_condition bc;

  /// Constant-coefficient linear reaction f(u) = L u. Exact in coefficient
  /// space, so no quadrature is needed.
  std::optional<Matrix> linear_reaction;
  /// General pointwise reaction (ignored when linear_reaction is set).
  reaction_function reaction;
  reaction_jacobian_function reaction_jacobian;
  std::vector<forcing_term> forcing;

  std::function<double(int species, std::span<double const> x, double t)> exact;
  std::function<double(int species, std::span<double const> x)> initial;

  bool has_reaction() const { return linear_reaction.has_value() || bool(reaction); }
};

struct example_params
{
  /// Example 4: rate constants.
  double a = 1.0, b = 100.0, c = 1.0;
  /// Example 4: start from v = prod cos instead
  /// of the exact solution at t = 0 (v = (b - c) prod cos).
  bool cosine_initial = false;
  /// Example 5: amplitude of the Gaussian bump added to the activator.
  double perturbation = 1e-3;
};

/// Benchmark problems 1-5. Examples 1-4 accept d in {1,2,3}; Example 5 is 2D.
problem_spec make_example(int id, int dims, example_params const &params = {});

/// Weak-form reaction and forcing F(U, t) and its Jacobian action on one
/// dof set, evaluated with q = k+2 Gauss points per direction on the finest
/// cells.
class reaction_evaluator
{
public:
  reaction_evaluator(problem_spec const &problem, dof_map const &dofs,
                     penalty_spec penalty = {});

  bool active() const;
  Vector evaluate(Vector const &U, double t) const;
  void linearize(Vector const &U, double t);
  Vector jacobian_apply(Vector const &w) const;
  /// Jacobian action at (U, t) without touching the cached linearisation.
  Vector jacobian_apply(Vector const &U, Vector const &w, double t) const;

private:
  template<class Kernel>
  void pointwise_pass(std::vector<full_grid_field> const &in, double t,
                      std::vector<std::vector<double>> *out, Kernel const &kernel) const;
  std::vector<full_grid_field> reconstruct(Vector const &U) const;
  Vector collect(std::vector<std::vector<double>> &fields) const;
  Vector linear_apply(Vector const &U) const;

  problem_spec const *problem_;
  dof_map const *dofs_;
  penalty_spec penalty_;
  cell_quadrature quad_;
  std::vector<Vector> forcing_shapes_;
  std::vector<double> jac_cache_; // cells x points x species^2
  bool has_cache_ = false;
};

/// The semi-discrete system of a problem on a dof set.
class reaction_diffusion_system : public split_system
{
public:
  reaction_diffusion_system(problem_spec problem, dof_map const &dofs,
                            penalty_spec penalty = {});
  reaction_diffusion_system(reaction_diffusion_system const &)            = delete;
  reaction_diffusion_system &operator=(reaction_diffusion_system const &) = delete;

  int species() const override { return problem_.n_species; }
  std::int64_t block_size() const override { return dofs_->size(); }
  void apply_linear(int s, Vector const &x, Vector &y) const override;
  bool has_nonlinear() const override { return reaction_.active(); }
  Vector nonlinear(Vector const &U, double t) override { return reaction_.evaluate(U, t); }
  void linearize(Vector const &U, double t) override { reaction_.linearize(U, t); }
  Vector jacobian_apply(Vector const &w) const override { return reaction_.jacobian_apply(w); }

  problem_spec const &problem() const { return problem_; }
  dof_map const &dofs() const { return *dofs_; }
  /// The kappa = 1 diffusion matrix (-S).
  csr_matrix const &unit_diffusion() const { return laplacian_; }

private:
  problem_spec problem_;
  dof_map const *dofs_;
  csr_matrix laplacian_;
  reaction_evaluator reaction_;
};

/// L2 projection of the initial data, species-major.
Vector initial_state(problem_spec const &problem, dof_map const &dofs);
/// L2 projection of the exact solution at time t, species-major.
Vector exact_state(problem_spec const &problem, dof_map const &dofs, double t);

Vector eval_reaction(Vector const &U, double t, problem_spec const &problem,
                     dof_map const &dofs);
Vector reaction_jacobian_matvec(Vector const &U, Vector const &w, double t,
                                problem_spec const &problem, dof_map const &dofs);

/// Per-species L2 error against the exact solution, by q = k+3 point Gauss
/// quadrature on the finest cells.
std::vector<double> l2_errors(Vector const &U, double t, problem_spec const &problem,
                              dof_map const &dofs);
double l2_error(Vector const &U, double t, problem_spec const &problem, dof_map const &dofs,
                int species = 0);

} // namespace sgiif
