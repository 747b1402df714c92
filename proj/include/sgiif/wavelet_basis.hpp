#pragma once

#include "sgiif/common.hpp"

#include <span>
#include <vector>

namespace sgiif
{
/// Polynomial degree and finest level of the one-dimensional hierarchy.
struct basis_config
{
  int k_poly = 1;
  int max_level = 0;
};

/// One-dimensional hierarchical index. Levels start at 0; translations and
/// polynomial indices are stored zero-based (p = 0 .. k_poly).
struct wavelet_index
{
  int level = 0;
  int trans = 0;
  int poly  = 0;

  friend bool operator==(wavelet_index const &, wavelet_index const &) = default;
};

/// Alpert multiwavelets on (-1,1). Row p of `left` / `right` holds the
/// coefficients of f_p in the orthonormal Legendre basis of (-1,0) / (0,1),
/// where each half-interval basis function has unit L2 norm on its half.
struct alpert_wavelets
{
  int k_poly = 0;
  Matrix left;
  Matrix right;

  /// f_p(x) for x in (-1,1); the left piece owns x <= 0.
  double value(int p, double x) const;
  double derivative(int p, double x) const;
};

/// Builds k_poly+1 orthonormal wavelets orthogonal to P^k_poly on (-1,1).
/// f_p has vanishing moments up to degree k_poly+p (zero-based p), and the
/// highest-degree monomial coefficient of each right piece is positive.
alpert_wavelets build_alpert_wavelets(int k_poly);

/// Two-scale filters between a parent cell and its two children, expressed in
/// orthonormal cell-local Legendre coordinates. Rows index parent functions
/// (scaling functions for h0/h1, wavelets for g0/g1); columns index the child
/// Legendre modes. The 2(k+1) square block matrix [[h0 h1],[g0 g1]] is
/// orthogonal.
struct two_scale_filters
{
  Matrix h0, h1, g0, g1;
};

two_scale_filters build_filters(alpert_wavelets const &wavelets);

/// Hierarchical basis on [0,1] up to level max_level.
///
/// Local layout: cell c of the level-N grid, Legendre mode p, at c*(k+1)+p.
/// Hierarchical layout: level 0 occupies [0, k+1); level n >= 1 occupies
/// [(k+1) 2^(n-1), (k+1) 2^n) with entry (j, p) at offset j*(k+1)+p. Thus all
/// functions up to level L occupy the first (k+1) 2^L entries.
class hierarchical_basis
{
public:
  explicit hierarchical_basis(basis_config config);

  int k_poly() const { return config_.k_poly; }
  int max_level() const { return config_.max_level; }
  int modes() const { return config_.k_poly + 1; }
  /// (k+1) 2^N, the size of both layouts.
  int size() const { return size_; }

  alpert_wavelets const &wavelets() const { return wavelets_; }
  two_scale_filters const &filters() const { return filters_; }

  static int flat_index(wavelet_index const &idx, int modes);
  static wavelet_index unflatten(int flat, int modes);
  int flat_index(wavelet_index const &idx) const { return flat_index(idx, modes()); }
  wavelet_index unflatten(int flat) const { return unflatten(flat, modes()); }

  /// Level of the hierarchical entry at `flat`.
  int level_of(int flat) const { return level_of_.at(flat); }

  /// Value (deriv = 0) or broken derivative (deriv = 1) of basis function
  /// idx at x in [0,1]. Cells own their right endpoint; x = 0 belongs to
  /// the first cell.
  double eval(wavelet_index const &idx, double x, int deriv = 0) const;

  /// Local Legendre coefficients -> hierarchical coefficients, in place.
  void forward(std::span<double> data) const;
  /// Hierarchical coefficients -> local Legendre coefficients, in place.
  void inverse(std::span<double> data) const;

  /// Dense orthogonal matrix T with hierarchical = T * local.
  Matrix dense_transform() const;

private:
  basis_config config_;
  int size_;
  alpert_wavelets wavelets_;
  two_scale_filters filters_;
  std::vector<int> level_of_;
};

/// Value of the cell-local orthonormal Legendre mode p on a cell of width h at
/// reference coordinate s in [0,1].
double local_legendre(int p, double s, double h);
double local_legendre_derivative(int p, double s, double h);

} // namespace sgiif
