#pragma once

#include "sgiif/common.hpp"
#include "sgiif/sparse_space.hpp"

#include <iosfwd>
#include <vector>

namespace sgiif
{
enum class bc_kind
{
  periodic,
  dirichlet
};

/// Boundary data. For Dirichlet conditions `g` may be empty, meaning g = 0.
struct boundary_condition
{
  bc_kind kind = bc_kind::periodic;
  std::function<double(std::span<double const> x, double t)> g;

  static boundary_condition periodic() { return {}; }
  static boundary_condition dirichlet_zero() { return {bc_kind::dirichlet, {}}; }
};

/// Interior penalty weight; the face term is sigma / h_N.
struct penalty_spec
{
  double sigma = 20.0;
};

/// Compressed sparse row matrix.
struct csr_matrix
{
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  std::vector<std::int64_t> row_ptr{0};
  std::vector<std::int64_t> col_idx;
  std::vector<double> values;

  std::int64_t nnz() const { return static_cast<std::int64_t>(values.size()); }
  void apply(Vector const &x, Vector &y) const;
  Vector operator*(Vector const &x) const;
  csr_matrix scaled(double factor) const;
  Matrix to_dense() const;
  double entry(std::int64_t r, std::int64_t c) const;
  /// Writes the lower triangle in MatrixMarket symmetric coordinate format.
  void write_matrix_market(std::ostream &out) const;
};

/// Symmetric interior penalty form of -d^2/dx^2 on the level-N grid in the
/// local Legendre basis (cell*(k+1) + mode ordering).
Matrix build_1d_ipdg_local(int k_poly, int max_level, bc_kind bc, penalty_spec penalty);

/// The same form in the hierarchical basis: T * S_local * T^T.
Matrix build_1d_ipdg(hierarchical_basis const &basis, bc_kind bc, penalty_spec penalty);

/// One-dimensional energy form: broken H1 + h {u'}{v'} + (1/h) [u][v] on faces,
/// in the hierarchical basis.
Matrix build_1d_energy(hierarchical_basis const &basis, bc_kind bc);

/// Nonzero pattern of a dense 1D matrix; entries below
/// drop_tolerance * max|S| are treated as zero.
struct sparse_rows
{
  std::vector<std::vector<std::pair<int, double>>> rows;
};
sparse_rows sparsify(Matrix const &dense, double drop_tolerance = 1e-13);

/// Assembles scale * sum_m (S_m (x) identity) restricted to the dof set.
csr_matrix assemble_kronecker_sum(dof_map const &dofs, sparse_rows const &one_d, double scale);

/// Diffusion matrix A = -kappa * (IPDG form) on the dof set. Mass is the
/// identity in the orthonormal basis, so dU/dt = A U is the semi-discrete
/// heat equation.
csr_matrix assemble_diffusion(dof_map const &dofs, double kappa, bc_kind bc,
                              penalty_spec penalty = {});

/// Matrix-free application of the same Kronecker-sum operator.
class kronecker_sum_operator
{
public:
  kronecker_sum_operator(dof_map const &dofs, sparse_rows one_d, double scale);
  void apply(Vector const &x, Vector &y) const;

private:
  dof_map const *dofs_;
  sparse_rows one_d_;
  double scale_;
};

/// Boundary part of the load functional for Dirichlet data g at time t,
/// scaled by kappa: kappa * int_{boundary} (-grad v . n + sigma/h v) g ds.
Vector dirichlet_load(dof_map const &dofs, boundary_condition const &bc, double kappa,
                      penalty_spec penalty, double t);

/// |||v||| (energy norm) of the field with coefficients c.
double energy_norm(Vector const &c, dof_map const &dofs, bc_kind bc);

} // namespace sgiif
