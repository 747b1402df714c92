#include "sgiif/krylov_expm.hpp"

#include <Eigen/Eigenvalues>

#include <array>
#include <cmath>
#include <random>

namespace sgiif
{
arnoldi_process::arnoldi_process(LinearOperator op, Vector const &seed, int max_dim,
                                 double breakdown_tol)
    : op_(std::move(op)), max_dim_(max_dim), tol_(breakdown_tol)
{
  expect(max_dim >= 1, "Krylov dimension must be at least 1");
  gamma_ = seed.norm();
  expect(gamma_ > 0.0 && std::isfinite(gamma_), "Arnoldi seed vector must be nonzero and finite");
  max_dim_ = static_cast<int>(std::min<std::int64_t>(max_dim, seed.size()));
  v_.resize(seed.size(), max_dim_ + 1);
  h_       = Matrix::Zero(max_dim_ + 1, max_dim_);
  v_.col(0) = seed / gamma_;
}

bool arnoldi_process::step()
{
  if (breakdown_ || dim_ >= max_dim_)
  {
    return false;
  }
  int const j = dim_;
  w_.resize(v_.rows());
  Vector const vj = v_.col(j);
  op_(vj, w_);
  double const scale = w_.norm();
  if (!std::isfinite(scale))
  {
    throw numerical_error("Arnoldi: operator produced a non-finite vector");
  }
  for (int pass = 0; pass < 2; ++pass)
  {
    for (int i = 0; i <= j; ++i)
    {
      double const c = v_.col(i).dot(w_);
      h_(i, j) += c;
      w_ -= c * v_.col(i);
    }
  }
  double const beta = w_.norm();
  h_(j + 1, j)      = beta;
  dim_              = j + 1;
  if (beta <= tol_ * scale || beta == 0.0)
  {
    breakdown_   = true;
    h_(j + 1, j) = 0.0;
    return false;
  }
  v_.col(j + 1) = w_ / beta;
  return dim_ < max_dim_;
}

arnoldi_factorization arnoldi_process::result() const
{
  arnoldi_factorization f;
  f.m_eff     = dim_;
  f.gamma     = gamma_;
  f.V         = v_.leftCols(dim_);
  f.H         = h_.topLeftCorner(dim_, dim_);
  f.breakdown = breakdown_;
  f.h_next    = breakdown_ ? 0.0 : h_(dim_, dim_ - 1);
  if (!breakdown_)
  {
    f.v_next = v_.col(dim_);
  }
  return f;
}

arnoldi_factorization arnoldi(LinearOperator const &op, Vector const &v, int M,
                              double breakdown_tol)
{
  arnoldi_process p(op, v, M, breakdown_tol);
  while (p.step())
  {
  }
  return p.result();
}

namespace
{
template<std::size_t N>
Matrix pade(Matrix const &a, std::array<double, N> const &b)
{
  // odd/even split: U = A * sum b_{2j+1} A^{2j}, V = sum b_{2j} A^{2j}
  Eigen::Index const n = a.rows();
  Matrix const id      = Matrix::Identity(n, n);
  Matrix const a2      = a * a;
  Matrix power         = id;
  Matrix u_sum         = Matrix::Zero(n, n);
  Matrix v_sum         = Matrix::Zero(n, n);
  for (std::size_t j = 0; 2 * j < N; ++j)
  {
    v_sum += b[2 * j] * power;
    if (2 * j + 1 < N)
    {
      u_sum += b[2 * j + 1] * power;
    }
    power = power * a2;
  }
  Matrix const u = a * u_sum;
  return (v_sum - u).partialPivLu().solve(v_sum + u);
}

Matrix pade13(Matrix const &a)
{
  static constexpr std::array<double, 14> b{
      64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
      129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
      1323241920.0,        40840800.0,          960960.0,           16380.0,
      182.0,               1.0};
  Eigen::Index const n = a.rows();
  Matrix const id      = Matrix::Identity(n, n);
  Matrix const a2      = a * a;
  Matrix const a4      = a2 * a2;
  Matrix const a6      = a4 * a2;
  Matrix const u =
      a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 +
           b[1] * id);
  Matrix const v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 +
                   b[2] * a2 + b[0] * id;
  return (v - u).partialPivLu().solve(v + u);
}
} // namespace

Matrix expm_dense(Matrix const &H)
{
  expect(H.rows() == H.cols(), "expm_dense: matrix must be square");
  expect(H.rows() <= 1024, "expm_dense: dimension above 1024");
  if (H.size() == 0)
  {
    return H;
  }
  if (!H.allFinite())
  {
    throw numerical_error("expm_dense: non-finite input");
  }
  double const norm1 = H.cwiseAbs().colwise().sum().maxCoeff();
  if (norm1 == 0.0)
  {
    return Matrix::Identity(H.rows(), H.cols());
  }
  if (norm1 <= 1.495585217958292e-2)
  {
    return pade(H, std::array<double, 4>{120.0, 60.0, 12.0, 1.0});
  }
  if (norm1 <= 2.539398330063230e-1)
  {
    return pade(H, std::array<double, 6>{30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0});
  }
  if (norm1 <= 9.504178996162932e-1)
  {
    return pade(H, std::array<double, 8>{17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0,
                                         1512.0, 56.0, 1.0});
  }
  if (norm1 <= 2.097847961257068)
  {
    return pade(H, std::array<double, 10>{17643225600.0, 8821612800.0, 2075673600.0,
                                          302702400.0, 30270240.0, 2162160.0, 110880.0,
                                          3960.0, 90.0, 1.0});
  }
  double const theta13 = 5.371920351148152;
  int const s = std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / theta13))));
  Matrix r    = pade13(H * std::ldexp(1.0, -s));
  for (int i = 0; i < s; ++i)
  {
    r = r * r;
  }
  return r;
}

Vector expm_multiply(LinearOperator const &op, Vector const &v, double tau, int M, int *m_eff)
{
  expect(std::isfinite(tau), "expm_multiply: tau must be finite");
  expect(M >= 1, "expm_multiply: Krylov dimension must be at least 1");
  if (tau == 0.0)
  {
    if (m_eff != nullptr)
    {
      *m_eff = 0;
    }
    return v;
  }
  auto const f = arnoldi(op, v, M);
  if (m_eff != nullptr)
  {
    *m_eff = f.m_eff;
  }
  Matrix const e = expm_dense(tau * f.H);
  return f.gamma * (f.V * e.col(0));
}

gmres_result gmres(LinearOperator const &op, Vector const &b, Vector const &x0, double tol,
                   int max_iter, int restart)
{
  expect(tol > 0.0 && max_iter >= 1 && restart >= 1, "gmres: invalid parameters");
  gmres_result out;
  out.x            = x0;
  double const bn  = b.norm();
  if (bn == 0.0)
  {
    out.x.setZero(b.size());
    out.converged = true;
    return out;
  }
  Vector r(b.size()), ax(b.size());
  while (true)
  {
    op(out.x, ax);
    r            = b - ax;
    double const beta = r.norm();
    out.residual = beta / bn;
    if (out.residual <= tol)
    {
      out.converged = true;
      return out;
    }
    if (out.iterations >= max_iter)
    {
      return out;
    }
    int const m = std::min(restart, max_iter - out.iterations);
    arnoldi_process p(op, r, m);
    // Givens rotations on the extended Hessenberg matrix
    std::vector<double> cs, sn;
    Vector g   = Vector::Zero(m + 1);
    g[0]       = beta;
    Matrix rfac = Matrix::Zero(m + 1, m);
    int k       = 0;
    bool more   = true;
    while (more)
    {
      more = p.step();
      int const j = p.dim() - 1;
      for (int i = 0; i <= j + 1 && i <= m; ++i)
      {
        rfac(i, j) = (i <= p.dim()) ? p.h(i, j) : 0.0;
      }
      for (int i = 0; i < j; ++i)
      {
        double const t0 = cs[i] * rfac(i, j) + sn[i] * rfac(i + 1, j);
        rfac(i + 1, j)  = -sn[i] * rfac(i, j) + cs[i] * rfac(i + 1, j);
        rfac(i, j)      = t0;
      }
      double const a = rfac(j, j), c = rfac(j + 1, j);
      double const rho = std::hypot(a, c);
      cs.push_back(rho == 0.0 ? 1.0 : a / rho);
      sn.push_back(rho == 0.0 ? 0.0 : c / rho);
      rfac(j, j)     = rho;
      rfac(j + 1, j) = 0.0;
      g[j + 1]       = -sn[j] * g[j];
      g[j]           = cs[j] * g[j];
      k              = j + 1;
      ++out.iterations;
      if (std::abs(g[j + 1]) / bn <= tol || p.breakdown())
      {
        break;
      }
    }
    Vector const y =
        rfac.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    for (int i = 0; i < k; ++i)
    {
      out.x += y[i] * p.basis(i);
    }
    if (p.breakdown() && std::abs(g[k]) / bn > tol)
    {
      // invariant subspace without convergence: the system is singular on it
      op(out.x, ax);
      out.residual = (b - ax).norm() / bn;
      out.converged = out.residual <= tol;
      return out;
    }
  }
}

eigen_estimate lanczos_extreme(LinearOperator const &op, std::int64_t n, spectrum_end which,
                               double rel_tol, int max_iter, std::uint64_t seed,
                               int basis_limit)
{
  expect(n >= 1, "lanczos_extreme: empty operator");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector start(n);
  for (auto &x : start)
  {
    x = normal(rng);
  }
  int const limit = static_cast<int>(std::min<std::int64_t>(basis_limit, n));
  eigen_estimate est;
  double previous = std::numeric_limits<double>::quiet_NaN();
  while (est.iterations < max_iter)
  {
    arnoldi_process p(op, start, limit);
    int const check_every = 10;
    Vector ritz_vector;
    while (true)
    {
      bool const more = p.step();
      ++est.iterations;
      int const m = p.dim();
      if (m % check_every != 0 && more && est.iterations < max_iter)
      {
        continue;
      }
      // symmetric tridiagonal projection
      Matrix t = Matrix::Zero(m, m);
      for (int i = 0; i < m; ++i)
      {
        t(i, i) = p.h(i, i);
        if (i + 1 < m)
        {
          t(i + 1, i) = t(i, i + 1) = 0.5 * (p.h(i + 1, i) + p.h(i, i + 1));
        }
      }
      Eigen::SelfAdjointEigenSolver<Matrix> es(t);
      int const idx     = which == spectrum_end::smallest ? 0 : m - 1;
      double const value = es.eigenvalues()[idx];
      // residual bound |beta_m * last component of the Ritz vector|
      double const beta  = p.breakdown() ? 0.0 : p.h(m, m - 1);
      double const resid = std::abs(beta * es.eigenvectors()(m - 1, idx));
      double const scale = std::max(std::abs(value), es.eigenvalues().cwiseAbs().maxCoeff());
      est.value          = value;
      bool const stable =
          std::isfinite(previous) && std::abs(value - previous) <= rel_tol * scale;
      previous = value;
      if (resid <= rel_tol * scale || p.breakdown() || (stable && resid <= 1e2 * rel_tol * scale))
      {
        est.converged = true;
        return est;
      }
      if (!more || est.iterations >= max_iter)
      {
        Vector const y = es.eigenvectors().col(idx);
        ritz_vector    = Vector::Zero(n);
        for (int i = 0; i < m; ++i)
        {
          ritz_vector += y[i] * p.basis(i);
        }
        break;
      }
    }
    start = ritz_vector;
  }
  return est;
}

} // namespace sgiif
