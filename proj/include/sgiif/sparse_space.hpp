#pragma once

#include "sgiif/common.hpp"
#include "sgiif/quadrature.hpp"
#include "sgiif/wavelet_basis.hpp"

#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace sgiif
{
enum class grid_kind
{
  sparse, ///< |l|_1 <= N
  full    ///< max_m l_m <= N
};

grid_kind parse_grid_kind(std::string const &name);
std::string to_string(grid_kind kind);

/// A d-dimensional tensor basis index. Components are zero-based.
struct hier_index
{
  std::vector<int> level;
  std::vector<int> trans;
  std::vector<int> poly;

  friend bool operator==(hier_index const &, hier_index const &) = default;
};

/// Pointwise function of a point in [0,1]^d.
using point_function = std::function<double(std::span<double const> x)>;

/// Ordered enumeration of the tensor basis for one truncation. Each degree of
/// freedom is stored as d flat one-dimensional hierarchical indices.
class dof_map
{
public:
  static constexpr std::int64_t default_max_dofs = 100'000'000;

  dof_map(int dims, int k_poly, int max_level, grid_kind kind,
          std::int64_t max_dofs = default_max_dofs);

  int dims() const { return dims_; }
  int k_poly() const { return k_poly_; }
  int max_level() const { return max_level_; }
  grid_kind kind() const { return kind_; }
  std::int64_t size() const { return static_cast<std::int64_t>(flat_.size()) / dims_; }
  /// Length of the one-dimensional layouts, (k+1) 2^N.
  int line_size() const { return basis_->size(); }
  /// Number of entries in the untruncated d-dimensional array.
  std::int64_t full_size() const { return full_size_; }

  hierarchical_basis const &basis() const { return *basis_; }
  std::shared_ptr<hierarchical_basis const> basis_ptr() const { return basis_; }

  /// Flat one-dimensional index of dof `i` in dimension m.
  int index_1d(std::int64_t i, int m) const { return flat_[i * dims_ + m]; }
  std::span<int const> indices(std::int64_t i) const
  {
    return {flat_.data() + i * dims_, static_cast<std::size_t>(dims_)};
  }
  hier_index at(std::int64_t i) const;

  /// Position of a multi-index (flat one-dimensional indices), or -1.
  std::int64_t find(std::span<int const> flat) const;
  std::int64_t find(hier_index const &idx) const;

  /// Offset of dof i in the row-major full array (dimension 0 slowest).
  std::int64_t full_offset(std::int64_t i) const { return full_offset_[i]; }

  bool admissible(std::span<int const> levels) const;

  /// Closed-form count sum_l (k+1)^d prod max(1, 2^(l_m - 1)).
  static std::int64_t count(int dims, int k_poly, int max_level, grid_kind kind);

private:
  std::int64_t key(std::span<int const> flat) const;

  int dims_;
  int k_poly_;
  int max_level_;
  grid_kind kind_;
  std::int64_t full_size_;
  std::shared_ptr<hierarchical_basis const> basis_;
  std::vector<int> flat_;
  std::vector<std::int64_t> full_offset_;
  std::unordered_map<std::int64_t, std::int64_t> lookup_;
};

/// Local Legendre coefficients of every cell of the uniform level-N grid,
/// stored in the same row-major layout as the full hierarchical array:
/// along each dimension the index is cell*(k+1) + mode.
struct full_grid_field
{
  int dims      = 0;
  int k_poly    = 0;
  int max_level = 0;
  std::vector<double> data;

  /// Evaluates the local polynomial at x (cells own their right endpoint).
  double eval(std::span<double const> x) const;
};

/// Zero-pads c into the full hierarchical array and transforms every
/// dimension to local Legendre coefficients.
full_grid_field to_fullgrid(std::span<double const> c, dof_map const &dofs);
inline full_grid_field to_fullgrid(Vector const &c, dof_map const &dofs)
{
  return to_fullgrid(as_span(c), dofs);
}

/// Forward transforms along every dimension and restricts to the dof set.
Vector from_fullgrid(full_grid_field const &g, dof_map const &dofs);

/// In-place transforms of a full array (hierarchical <-> local Legendre).
void forward_full(std::span<double> data, int dims, hierarchical_basis const &basis);
void inverse_full(std::span<double> data, int dims, hierarchical_basis const &basis);

/// Tensor Gauss quadrature on the cells of the finest grid. Converts between
/// local Legendre coefficients and point values of one cell.
class cell_quadrature
{
public:
  cell_quadrature(int dims, int k_poly, int max_level, int points);

  int dims() const { return dims_; }
  int points() const { return points_; }
  int modes() const { return modes_; }
  int cells_per_dim() const { return cells_; }
  double cell_width() const { return width_; }
  std::int64_t points_per_cell() const { return points_per_cell_; }
  std::int64_t modes_per_cell() const { return modes_per_cell_; }
  quadrature_rule const &rule() const { return rule_; }

  /// Cell coefficients (modes^d) -> point values (points^d). `work` must hold
  /// 2 max(points, modes)^d values.
  void to_points(std::span<double const> coeffs, std::span<double> values,
                 std::span<double> work) const;
  /// Point values -> weighted projections onto the cell modes.
  void to_modes(std::span<double const> values, std::span<double> coeffs,
                std::span<double> work) const;

  /// Coordinates of point `pt` of the cell with per-dimension indices `cell`.
  void point_coords(std::span<int const> cell, std::int64_t pt, std::span<double> x) const;

  /// Copy between one cell's coefficient block and a full_grid_field layout.
  void gather(std::span<double const> field, std::span<int const> cell,
              std::span<double> block) const;
  void scatter(std::span<double const> block, std::span<int const> cell,
               std::span<double> field) const;

private:
  std::int64_t cell_base(std::span<int const> cell) const;

  int dims_;
  int modes_;
  int points_;
  int cells_;
  double width_;
  std::int64_t points_per_cell_;
  std::int64_t modes_per_cell_;
  quadrature_rule rule_;
  Matrix eval_;    // points x modes, includes 1/sqrt(h)
  Matrix project_; // modes x points, includes weights * h / sqrt(h)
  Matrix eval_kron_;    // tensor products of the above, when small
  Matrix project_kron_;
  std::vector<std::int64_t> strides_;
  std::vector<std::int64_t> local_offsets_;
};

/// Per-dimension indices of the cell with row-major position `flat`.
void cell_from_flat(std::int64_t flat, int dims, int cells_per_dim, std::span<int> cell);

/// Refuses full-grid work above the configured value budget.
void check_full_grid_budget(int dims, int k_poly, int max_level);

/// L2 projection onto the dof set using q-point Gauss quadrature per finest
/// cell and direction (q = 0 selects k_poly + 2).
Vector project_l2(point_function const &f, dof_map const &dofs, int q = 0);

/// Value of the discrete field at x by direct summation over the dofs.
double eval_point(std::span<double const> c, dof_map const &dofs, std::span<double const> x);
inline double eval_point(Vector const &c, dof_map const &dofs, std::span<double const> x)
{
  return eval_point(as_span(c), dofs, x);
}

/// Samples the fields (one coefficient block per species) on a uniform
/// cell-centred lattice with `points_per_dim` points per direction and writes
/// CSV with header x1,...,xd,species_0,...
void write_snapshot_csv(std::string const &path, std::span<Vector const> species,
                        dof_map const &dofs, int points_per_dim);

} // namespace sgiif
