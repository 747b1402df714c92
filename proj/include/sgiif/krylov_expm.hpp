#pragma once

#include "sgiif/common.hpp"

#include <cstdint>

namespace sgiif
{
/// Arnoldi relation A V = V H + h_next v_next e_m^T.
struct arnoldi_factorization
{
  Matrix V;          ///< n x m_eff, orthonormal columns
  Matrix H;          ///< m_eff x m_eff upper Hessenberg
  double gamma = 0;  ///< norm of the seed vector
  int m_eff    = 0;  ///< dimension actually built
  double h_next = 0; ///< subdiagonal entry below H (0 on breakdown)
  Vector v_next;     ///< next basis vector (empty on breakdown)
  bool breakdown = false;
};

/// Incremental Arnoldi process: modified Gram-Schmidt with one
/// re-orthogonalisation pass. A step reports happy breakdown when the new
/// residual norm falls below breakdown_tol * |A v_j|.
class arnoldi_process
{
public:
  arnoldi_process(LinearOperator op, Vector const &seed, int max_dim,
                  double breakdown_tol = 1e-14);

  /// Extends the basis by one vector; returns false once the subspace is
  /// invariant or max_dim is reached.
  bool step();

  int dim() const { return dim_; }
  bool breakdown() const { return breakdown_; }
  double gamma() const { return gamma_; }
  /// Entry (i, j) of the (dim+1) x dim extended Hessenberg matrix.
  double h(int i, int j) const { return h_(i, j); }
  arnoldi_factorization result() const;
  /// Basis vector i (0 <= i <= dim).
  auto basis(int i) const { return v_.col(i); }

private:
  LinearOperator op_;
  int max_dim_;
  double tol_;
  double gamma_;
  int dim_        = 0;
  bool breakdown_ = false;
  Matrix v_;
  Matrix h_;
  Vector w_;
};

/// Runs up to M Arnoldi steps from seed v. Throws validation_error for a
/// zero seed or M < 1.
arnoldi_factorization arnoldi(LinearOperator const &op, Vector const &v, int M,
                              double breakdown_tol = 1e-14);

/// Dense matrix exponential by scaling and squaring with diagonal Pade
/// approximants of degree 3, 5, 7, 9 or 13.
Matrix expm_dense(Matrix const &H);

/// e^{tau A} v from an M-dimensional Krylov subspace. Optionally reports the
/// dimension used.
Vector expm_multiply(LinearOperator const &op, Vector const &v, double tau, int M,
                     int *m_eff = nullptr);

struct gmres_result
{
  Vector x;
  int iterations  = 0;
  double residual = 0; ///< final relative residual |b - A x| / |b|
  bool converged  = false;
};

/// Restarted GMRES for A x = b starting from x0, stopping at relative
/// residual tol or after max_iter inner iterations in total.
gmres_result gmres(LinearOperator const &op, Vector const &b, Vector const &x0, double tol,
                   int max_iter, int restart = 50);

struct eigen_estimate
{
  double value    = 0;
  int iterations  = 0;
  bool converged  = false;
};

enum class spectrum_end
{
  smallest,
  largest
};

/// Extremal eigenvalue of a symmetric operator by Lanczos with full
/// re-orthogonalisation and explicit restarts on the current Ritz vector.
eigen_estimate lanczos_extreme(LinearOperator const &op, std::int64_t n, spectrum_end which,
                               double rel_tol = 1e-8, int max_iter = 5000,
                               std::uint64_t seed = 1, int basis_limit = 300);

} // namespace sgiif
