#include "sgiif/wavelet_basis.hpp"

#include "sgiif/quadrature.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>

namespace sgiif
{
namespace
{
// orthonormal Legendre on (-1,1)
double parent_legendre(int p, double x)
{
  double v, dv;
  legendre(p, x, v, dv);
  return std::sqrt((2.0 * p + 1.0) / 2.0) * v;
}

// half-interval orthonormal Legendre modes; left half (-1,0], right (0,1)
double half_mode(int q, double x, bool left)
{
  return shifted_legendre(q, left ? x + 1.0 : x);
}

double half_mode_derivative(int q, double x, bool left)
{
  return shifted_legendre_derivative(q, left ? x + 1.0 : x);
}

// Monomial coefficients of the right piece, lowest degree first.
Vector right_monomials(Eigen::Ref<Vector const> const coeffs)
{
  int const n = static_cast<int>(coeffs.size());
  Matrix vander(n, n);
  Vector values(n);
  for (int i = 0; i < n; ++i)
  {
    double const x = (i + 0.5) / n;
    double v       = 0.0;
    for (int q = 0; q < n; ++q)
    {
      v += coeffs(q) * half_mode(q, x, false);
    }
    values(i) = v;
    for (int m = 0; m < n; ++m)
    {
      vander(i, m) = std::pow(x, m);
    }
  }
  return vander.fullPivLu().solve(values);
}

void fix_sign(Eigen::Ref<Vector> f, int modes)
{
  Vector const mono = right_monomials(f.tail(modes));
  double const scale = mono.cwiseAbs().maxCoeff();
  for (int m = modes - 1; m >= 0; --m)
  {
    if (std::abs(mono(m)) > 1e-8 * scale)
    {
      if (mono(m) < 0)
      {
        f = -f;
      }
      return;
    }
  }
}
} // namespace

double alpert_wavelets::value(int p, double x) const
{
  bool const is_left = x <= 0.0;
  Matrix const &c    = is_left ? left : right;
  double v           = 0.0;
  for (int q = 0; q <= k_poly; ++q)
  {
    v += c(p, q) * half_mode(q, x, is_left);
  }
  return v;
}

double alpert_wavelets::derivative(int p, double x) const
{
  bool const is_left = x <= 0.0;
  Matrix const &c    = is_left ? left : right;
  double v           = 0.0;
  for (int q = 0; q <= k_poly; ++q)
  {
    v += c(p, q) * half_mode_derivative(q, x, is_left);
  }
  return v;
}

alpert_wavelets build_alpert_wavelets(int k_poly)
{
  expect(k_poly >= 0 && k_poly <= 6, "build_alpert_wavelets: k_poly must be in 0..6");
  int const modes = k_poly + 1;
  int const dim   = 2 * modes;

  // Coordinates: [left half modes, right half modes]. Inner products are
  // Euclidean in these coordinates.
  auto const rule = gauss_rule(std::min(16, 2 * modes + 2));
  auto const half_integral = [&](auto &&fn, bool left) {
    double s = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    {
      double const x = left ? rule.nodes[i] - 1.0 : rule.nodes[i];
      s += rule.weights[i] * fn(x);
    }
    return s;
  };

  Matrix poly(modes, dim);
  for (int p = 0; p < modes; ++p)
  {
    for (int q = 0; q < modes; ++q)
    {
      poly(p, q) = half_integral(
          [&](double x) { return parent_legendre(p, x) * half_mode(q, x, true); }, true);
      poly(p, modes + q) = half_integral(
          [&](double x) { return parent_legendre(p, x) * half_mode(q, x, false); }, false);
    }
  }

  Eigen::HouseholderQR<Matrix> qr(poly.transpose());
  Matrix const q_full     = qr.householderQ() * Matrix::Identity(dim, dim);
  Matrix const complement = q_full.rightCols(modes);

  // moments against x^m, m = modes .. 2k, in complement coordinates
  Matrix moments(std::max(0, k_poly), modes);
  for (int m = 0; m < k_poly; ++m)
  {
    int const degree = modes + m;
    Vector mu(dim);
    for (int q = 0; q < modes; ++q)
    {
      mu(q) = half_integral(
          [&](double x) { return std::pow(x, degree) * half_mode(q, x, true); }, true);
      mu(modes + q) = half_integral(
          [&](double x) { return std::pow(x, degree) * half_mode(q, x, false); }, false);
    }
    moments.row(m) = mu.transpose() * complement;
  }

  // f_k first (most vanishing moments), then downwards; each is the null
  // vector of its moment rows plus orthogonality to the ones already found.
  Matrix found(modes, modes);
  for (int p = k_poly; p >= 0; --p)
  {
    Vector y(modes);
    if (k_poly == 0)
    {
      y(0) = 1.0;
    }
    else
    {
      Matrix constraints(k_poly, modes);
      int row = 0;
      for (int m = 0; m < p; ++m)
      {
        constraints.row(row++) = moments.row(m);
      }
      for (int other = p + 1; other <= k_poly; ++other)
      {
        constraints.row(row++) = found.col(other).transpose();
      }
      Eigen::JacobiSVD<Matrix> svd(constraints, Eigen::ComputeFullV);
      y = svd.matrixV().col(modes - 1);
    }
    found.col(p) = y.normalized();
  }

  Matrix f = complement * found; // dim x modes
  // one re-orthogonalization sweep against P^k and each other
  for (int p = 0; p < modes; ++p)
  {
    for (int pass = 0; pass < 2; ++pass)
    {
      for (int r = 0; r < modes; ++r)
      {
        f.col(p) -= poly.row(r).transpose() * poly.row(r).dot(f.col(p));
      }
      for (int r = 0; r < p; ++r)
      {
        f.col(p) -= f.col(r) * f.col(r).dot(f.col(p));
      }
    }
    f.col(p).normalize();
    fix_sign(f.col(p), modes);
  }

  alpert_wavelets result;
  result.k_poly = k_poly;
  result.left   = f.topRows(modes).transpose();
  result.right  = f.bottomRows(modes).transpose();
  return result;
}

two_scale_filters build_filters(alpert_wavelets const &wavelets)
{
  int const modes = wavelets.k_poly + 1;
  auto const rule = gauss_rule(std::min(16, modes + 1));
  two_scale_filters f;
  f.h0.resize(modes, modes);
  f.h1.resize(modes, modes);
  for (int p = 0; p < modes; ++p)
  {
    for (int q = 0; q < modes; ++q)
    {
      double s0 = 0.0, s1 = 0.0;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i)
      {
        double const xl = rule.nodes[i] - 1.0;
        double const xr = rule.nodes[i];
        s0 += rule.weights[i] * parent_legendre(p, xl) * half_mode(q, xl, true);
        s1 += rule.weights[i] * parent_legendre(p, xr) * half_mode(q, xr, false);
      }
      f.h0(p, q) = s0;
      f.h1(p, q) = s1;
    }
  }
  f.g0 = wavelets.left;
  f.g1 = wavelets.right;
  return f;
}

double local_legendre(int p, double s, double h)
{
  return shifted_legendre(p, s) / std::sqrt(h);
}

double local_legendre_derivative(int p, double s, double h)
{
  return shifted_legendre_derivative(p, s) / (h * std::sqrt(h));
}

hierarchical_basis::hierarchical_basis(basis_config config)
    : config_(config),
      size_(static_cast<int>((config.k_poly + 1) * pow2(config.max_level))),
      wavelets_(build_alpert_wavelets(config.k_poly)), filters_(build_filters(wavelets_))
{
  expect(config.max_level >= 0 && config.max_level <= 24,
         "hierarchical_basis: level out of range");
  level_of_.resize(size_);
  for (int i = 0; i < size_; ++i)
  {
    level_of_[i] = unflatten(i).level;
  }
}

int hierarchical_basis::flat_index(wavelet_index const &idx, int modes)
{
  if (idx.level == 0)
  {
    return idx.poly;
  }
  return static_cast<int>(modes * pow2(idx.level - 1)) + idx.trans * modes + idx.poly;
}

wavelet_index hierarchical_basis::unflatten(int flat, int modes)
{
  int const block = flat / modes;
  int const p     = flat % modes;
  if (block == 0)
  {
    return {0, 0, p};
  }
  int level = 1;
  while (pow2(level) <= block)
  {
    ++level;
  }
  return {level, static_cast<int>(block - pow2(level - 1)), p};
}

double hierarchical_basis::eval(wavelet_index const &idx, double x, int deriv) const
{
  if (!(x >= 0.0 && x <= 1.0))
  {
    throw std::domain_error("hierarchical_basis::eval: x outside [0,1]");
  }
  expect(idx.level >= 0 && idx.level <= max_level() && idx.poly >= 0 &&
             idx.poly < modes() && idx.trans >= 0 &&
             idx.trans < translations(idx.level),
         "hierarchical_basis::eval: invalid index");
  if (idx.level == 0)
  {
    return deriv == 0 ? local_legendre(idx.poly, x, 1.0)
                      : local_legendre_derivative(idx.poly, x, 1.0);
  }
  double const width = std::ldexp(1.0, -(idx.level - 1));
  double const a     = idx.trans * width;
  double const b     = a + width;
  if (x < a || x > b || (x == a && a > 0.0))
  {
    return 0.0;
  }
  double const xi    = 2.0 * (x - a) / width - 1.0;
  double const scale = std::sqrt(std::ldexp(1.0, idx.level));
  if (deriv == 0)
  {
    return scale * wavelets_.value(idx.poly, xi);
  }
  return scale * (2.0 / width) * wavelets_.derivative(idx.poly, xi);
}

void hierarchical_basis::forward(std::span<double> data) const
{
  expect(static_cast<int>(data.size()) == size_, "forward transform: length mismatch");
  int const k1 = modes();
  thread_local std::vector<double> work;
  work.assign(data.begin(), data.end());
  auto const &f = filters_;
  double scaling[16];
  double detail[16];
  for (int n = max_level(); n >= 1; --n)
  {
    int const parents = static_cast<int>(pow2(n - 1));
    int const offset  = parents * k1;
    for (int c = 0; c < parents; ++c)
    {
      double const *a = &work[(2 * c) * k1];
      double const *b = &work[(2 * c + 1) * k1];
      for (int p = 0; p < k1; ++p)
      {
        double s = 0.0, d = 0.0;
        for (int q = 0; q < k1; ++q)
        {
          s += f.h0(p, q) * a[q] + f.h1(p, q) * b[q];
          d += f.g0(p, q) * a[q] + f.g1(p, q) * b[q];
        }
        scaling[p] = s;
        detail[p]  = d;
      }
      for (int p = 0; p < k1; ++p)
      {
        data[offset + c * k1 + p] = detail[p];
      }
      // parents are written in place below the children; c*k1 <= 2c*k1
      for (int p = 0; p < k1; ++p)
      {
        work[c * k1 + p] = scaling[p];
      }
    }
  }
  for (int p = 0; p < k1; ++p)
  {
    data[p] = work[p];
  }
}

void hierarchical_basis::inverse(std::span<double> data) const
{
  expect(static_cast<int>(data.size()) == size_, "inverse transform: length mismatch");
  int const k1 = modes();
  thread_local std::vector<double> work;
  work.assign(data.size(), 0.0);
  for (int p = 0; p < k1; ++p)
  {
    work[p] = data[p];
  }
  auto const &f = filters_;
  double left[16];
  double right[16];
  for (int n = 1; n <= max_level(); ++n)
  {
    int const parents = static_cast<int>(pow2(n - 1));
    int const offset  = parents * k1;
    // descending so that children 2c, 2c+1 never overwrite unread parents
    for (int c = parents - 1; c >= 0; --c)
    {
      double const *s = &work[c * k1];
      double const *d = &data[offset + c * k1];
      for (int q = 0; q < k1; ++q)
      {
        double l = 0.0, r = 0.0;
        for (int p = 0; p < k1; ++p)
        {
          l += f.h0(p, q) * s[p] + f.g0(p, q) * d[p];
          r += f.h1(p, q) * s[p] + f.g1(p, q) * d[p];
        }
        left[q]  = l;
        right[q] = r;
      }
      for (int q = 0; q < k1; ++q)
      {
        work[(2 * c) * k1 + q]     = left[q];
        work[(2 * c + 1) * k1 + q] = right[q];
      }
    }
  }
  std::copy(work.begin(), work.end(), data.begin());
}

Matrix hierarchical_basis::dense_transform() const
{
  Matrix t(size_, size_);
  std::vector<double> column(size_);
  for (int i = 0; i < size_; ++i)
  {
    std::fill(column.begin(), column.end(), 0.0);
    column[i] = 1.0;
    forward(column);
    for (int r = 0; r < size_; ++r)
    {
      t(r, i) = column[r];
    }
  }
  return t;
}

} // namespace sgiif
