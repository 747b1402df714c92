#include "sgiif/quadrature.hpp"
#include "sgiif/wavelet_basis.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace sgiif;

namespace
{
// integral over (-1,1) of f(x) g(x), piecewise Gauss on each half
template<typename F>
double integrate_pm1(F &&f)
{
  auto const r = gauss_rule(10);
  double s     = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i)
  {
    s += r.weights[i] * f(-1.0 + r.nodes[i]);
    s += r.weights[i] * f(r.nodes[i]);
  }
  return s;
}

// integral over [0,1] of f, Gauss on each finest cell of level `level`
template<typename F>
double integrate_01(F &&f, int level, int q = 8)
{
  auto const r   = gauss_rule(q);
  int const n    = 1 << level;
  double const h = 1.0 / n;
  double s       = 0.0;
  for (int c = 0; c < n; ++c)
  {
    for (std::size_t i = 0; i < r.nodes.size(); ++i)
    {
      s += h * r.weights[i] * f((c + r.nodes[i]) * h);
    }
  }
  return s;
}
} // namespace

TEST(AlpertWavelets, HaarCase)
{
  auto const w = build_alpert_wavelets(0);
  double const a = std::abs(w.value(0, 0.5));
  EXPECT_NEAR(a, 1.0 / std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(w.value(0, -0.5), -w.value(0, 0.5), 1e-14);
  EXPECT_GT(w.value(0, 0.5), 0.0);
}

class AlpertByDegree : public ::testing::TestWithParam<int>
{
};

TEST_P(AlpertByDegree, OrthonormalWithVanishingMoments)
{
  int const k  = GetParam();
  auto const w = build_alpert_wavelets(k);
  for (int p = 0; p <= k; ++p)
  {
    for (int q = 0; q <= k; ++q)
    {
      double const g = integrate_pm1([&](double x) { return w.value(p, x) * w.value(q, x); });
      EXPECT_NEAR(g, p == q ? 1.0 : 0.0, 1e-13) << p << "," << q;
    }
    for (int m = 0; m <= k + p; ++m)
    {
      double const mom = integrate_pm1([&](double x) { return std::pow(x, m) * w.value(p, x); });
      EXPECT_NEAR(mom, 0.0, 1e-12) << "p=" << p << " m=" << m;
    }
  }
}

TEST_P(AlpertByDegree, FiltersAreOrthogonal)
{
  int const k  = GetParam();
  auto const f = build_filters(build_alpert_wavelets(k));
  int const m  = k + 1;
  Matrix block(2 * m, 2 * m);
  block << f.h0, f.h1, f.g0, f.g1;
  EXPECT_LT((block * block.transpose() - Matrix::Identity(2 * m, 2 * m)).norm(), 1e-13);
}

INSTANTIATE_TEST_SUITE_P(Degrees, AlpertByDegree, ::testing::Values(0, 1, 2, 3, 4));

TEST(HierarchicalBasis, SpecExamples)
{
  hierarchical_basis const b({1, 3});
  EXPECT_NEAR(b.eval({0, 0, 0}, 0.3), 1.0, 1e-14);
  EXPECT_NEAR(b.eval({0, 0, 1}, 0.5), 0.0, 1e-14);
  EXPECT_EQ(b.eval({2, 1, 0}, 0.3), 0.0);
  EXPECT_THROW(b.eval({0, 0, 0}, 1.5), std::domain_error);
  EXPECT_THROW(b.eval({0, 0, 0}, -0.1), std::domain_error);
}

TEST(HierarchicalBasis, SupportRule)
{
  hierarchical_basis const b({2, 4});
  for (int n = 1; n <= 4; ++n)
  {
    int const ntrans = 1 << (n - 1);
    double const w   = 1.0 / ntrans;
    for (int j = 0; j < ntrans; ++j)
    {
      for (double x = 0.0; x <= 1.0; x += 1.0 / 97)
      {
        bool const inside = x > j * w && x <= (j + 1) * w;
        if (!inside && !(j == 0 && x == 0.0))
        {
          for (int p = 0; p < 3; ++p)
          {
            EXPECT_EQ(b.eval({n, j, p}, x), 0.0);
          }
        }
      }
    }
  }
}

class BasisByDegree : public ::testing::TestWithParam<int>
{
};

TEST_P(BasisByDegree, OrthonormalAndVanishingMoments)
{
  int const k = GetParam();
  int const n_level = 4;
  hierarchical_basis const b({k, n_level});
  int const n = b.size();
  for (int a = 0; a < n; ++a)
  {
    auto const ia = b.unflatten(a);
    for (int c = a; c < n; ++c)
    {
      auto const ic = b.unflatten(c);
      double const g =
          integrate_01([&](double x) { return b.eval(ia, x) * b.eval(ic, x); }, n_level);
      EXPECT_NEAR(g, a == c ? 1.0 : 0.0, 1e-12);
    }
    if (ia.level >= 1)
    {
      for (int q = 0; q <= k; ++q)
      {
        double const mom =
            integrate_01([&](double x) { return std::pow(x, q) * b.eval(ia, x); }, n_level);
        EXPECT_NEAR(mom, 0.0, 1e-12);
      }
    }
  }
}

TEST_P(BasisByDegree, DenseTransformMatchesQuadratureOracle)
{
  int const k = GetParam();
  int const n_level = 3;
  hierarchical_basis const b({k, n_level});
  int const n      = b.size();
  int const m      = k + 1;
  double const h   = std::ldexp(1.0, -n_level);
  Matrix oracle(n, n);
  auto const rule = gauss_rule(8);
  for (int a = 0; a < n; ++a)
  {
    auto const ia = b.unflatten(a);
    for (int cell = 0; cell < (1 << n_level); ++cell)
    {
      for (int p = 0; p < m; ++p)
      {
        double s = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        {
          double const x = (cell + rule.nodes[i]) * h;
          s += h * rule.weights[i] * b.eval(ia, x) * local_legendre(p, rule.nodes[i], h);
        }
        oracle(a, cell * m + p) = s;
      }
    }
  }
  Matrix const t = b.dense_transform();
  EXPECT_LT((t - oracle).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((t * t.transpose() - Matrix::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST_P(BasisByDegree, FastTransformMatchesDenseUpToLevel8)
{
  int const k = GetParam();
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  for (int n_level = 0; n_level <= 8; ++n_level)
  {
    hierarchical_basis const b({k, n_level});
    int const n = b.size();
    Vector x(n);
    for (int i = 0; i < n; ++i)
    {
      x[i] = normal(rng);
    }
    Matrix const t = b.dense_transform();
    Vector y       = x;
    b.forward({y.data(), static_cast<std::size_t>(n)});
    EXPECT_LT((y - t * x).cwiseAbs().maxCoeff(), 1e-12);
    b.inverse({y.data(), static_cast<std::size_t>(n)});
    EXPECT_LT((y - x).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST_P(BasisByDegree, NestingIntoFinerLegendre)
{
  // a level-n function is a piecewise polynomial on the level-n grid, so its
  // level-N local Legendre expansion reproduces it pointwise
  int const k = GetParam();
  hierarchical_basis const b({k, 5});
  int const m    = k + 1;
  double const h = std::ldexp(1.0, -5);
  for (int a = 0; a < b.size(); ++a)
  {
    std::vector<double> line(b.size(), 0.0);
    line[a] = 1.0;
    b.inverse(line);
    auto const ia = b.unflatten(a);
    for (double x : {0.011, 0.26, 0.5, 0.73, 0.999})
    {
      // cells own their right endpoint
      int const cell = std::max(0, static_cast<int>(std::ceil(x / h)) - 1);
      double const s = x / h - cell;
      double v       = 0.0;
      for (int p = 0; p < m; ++p)
      {
        v += line[cell * m + p] * local_legendre(p, s, h);
      }
      EXPECT_NEAR(v, b.eval(ia, x), 1e-11);
    }
  }
}

TEST_P(BasisByDegree, PolynomialAnnihilation)
{
  int const k = GetParam();
  int const n_level = 6;
  hierarchical_basis const b({k, n_level});
  int const m    = k + 1;
  int const n    = b.size();
  double const h = std::ldexp(1.0, -n_level);
  auto const rule = gauss_rule(6);
  std::vector<double> local(n, 0.0);
  for (int cell = 0; cell < (1 << n_level); ++cell)
  {
    for (int p = 0; p < m; ++p)
    {
      double s = 0.0;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i)
      {
        double const x = (cell + rule.nodes[i]) * h;
        s += h * rule.weights[i] * std::pow(x, k) * local_legendre(p, rule.nodes[i], h);
      }
      local[cell * m + p] = s;
    }
  }
  b.forward(local);
  for (int i = m; i < n; ++i)
  {
    EXPECT_NEAR(local[i], 0.0, 1e-12);
  }
}

INSTANTIATE_TEST_SUITE_P(Degrees, BasisByDegree, ::testing::Values(1, 2));

TEST(HierarchicalBasis, LevelZeroIsIdentity)
{
  hierarchical_basis const b({2, 0});
  std::vector<double> v{1.0, 2.0, 3.0};
  b.forward(v);
  EXPECT_EQ(v, (std::vector<double>{1.0, 2.0, 3.0}));
}

TEST(HierarchicalBasis, LengthMismatchRejected)
{
  hierarchical_basis const b({1, 2});
  std::vector<double> v(5);
  EXPECT_ANY_THROW(b.forward(v));
}
