#include "sgiif/sparse_space.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

using namespace sgiif;

namespace
{
Vector random_vector(std::int64_t n, unsigned seed)
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector v(n);
  for (auto &x : v)
  {
    x = normal(rng);
  }
  return v;
}

// brute-force count by enumerating every level multi-index
std::int64_t brute_count(int d, int k, int n, grid_kind kind)
{
  std::vector<int> l(d, 0);
  std::int64_t total = 0;
  while (true)
  {
    int sum = 0, mx = 0;
    std::int64_t c = 1;
    for (int m = 0; m < d; ++m)
    {
      sum += l[m];
      mx = std::max(mx, l[m]);
      c *= (k + 1) * (l[m] == 0 ? 1 : (1 << (l[m] - 1)));
    }
    if ((kind == grid_kind::sparse && sum <= n) || (kind == grid_kind::full && mx <= n))
    {
      total += c;
    }
    int m = 0;
    while (m < d && ++l[m] > n)
    {
      l[m++] = 0;
    }
    if (m == d)
    {
      return total;
    }
  }
}
} // namespace

TEST(DofMap, TableCounts)
{
  EXPECT_EQ(dof_map(2, 1, 4, grid_kind::sparse).size(), 192);
  EXPECT_EQ(dof_map(3, 2, 6, grid_kind::sparse).size(), 18576);
  EXPECT_EQ(dof_map(1, 2, 3, grid_kind::sparse).size(), 24);
  EXPECT_EQ(dof_map(2, 1, 3, grid_kind::full).size(), 256);
}

TEST(DofMap, CountMatchesBruteForce)
{
  for (int d = 1; d <= 3; ++d)
  {
    for (int k = 0; k <= 2; ++k)
    {
      for (int n = 0; n <= 5; ++n)
      {
        for (auto kind : {grid_kind::sparse, grid_kind::full})
        {
          std::int64_t const b = brute_count(d, k, n, kind);
          EXPECT_EQ(dof_map::count(d, k, n, kind), b);
          EXPECT_EQ(dof_map(d, k, n, kind).size(), b);
        }
      }
    }
  }
}

TEST(DofMap, OrderingLookupAndNesting)
{
  dof_map const sparse(3, 1, 4, grid_kind::sparse);
  dof_map const full(3, 1, 4, grid_kind::full);
  std::set<std::vector<int>> seen;
  std::vector<int> prev_key;
  for (std::int64_t i = 0; i < sparse.size(); ++i)
  {
    auto const idx = sparse.at(i);
    int sum        = 0;
    for (int l : idx.level)
    {
      sum += l;
    }
    std::vector<int> key{sum};
    key.insert(key.end(), idx.level.begin(), idx.level.end());
    key.insert(key.end(), idx.trans.begin(), idx.trans.end());
    key.insert(key.end(), idx.poly.begin(), idx.poly.end());
    EXPECT_TRUE(prev_key.empty() || prev_key < key);
    prev_key = key;
    EXPECT_TRUE(seen.insert(key).second);
    EXPECT_EQ(sparse.find(idx), i);
    EXPECT_GE(full.find(idx), 0);
  }
  hier_index bad{{4, 1, 0}, {0, 0, 0}, {0, 0, 0}};
  EXPECT_EQ(sparse.find(bad), -1);
}

TEST(DofMap, OverflowGuard)
{
  EXPECT_THROW(dof_map(3, 2, 9, grid_kind::full, 1000), validation_error);
}

TEST(Projection, ConstantFunction)
{
  dof_map const dofs(2, 2, 4, grid_kind::sparse);
  Vector const c = project_l2([](std::span<double const>) { return 1.0; }, dofs);
  EXPECT_NEAR(c[0], 1.0, 1e-12);
  EXPECT_LT(c.tail(c.size() - 1).cwiseAbs().maxCoeff(), 1e-12);
  double const x[] = {0.123, 0.987};
  EXPECT_NEAR(eval_point(c, dofs, x), 1.0, 1e-12);
}

TEST(Projection, LinearFunctionIsExact)
{
  dof_map const dofs(2, 1, 5, grid_kind::sparse);
  Vector const c = project_l2([](std::span<double const> x) { return x[0]; }, dofs);
  for (double y : {0.0, 0.4, 1.0})
  {
    double const x[] = {0.37, y};
    EXPECT_NEAR(eval_point(c, dofs, x), 0.37, 1e-12);
  }
  // exact L2 norm of x1 on the unit square is 1/sqrt(3)
  EXPECT_NEAR(c.norm(), 1.0 / std::sqrt(3.0), 1e-12);
}

TEST(Projection, SecondOrderConvergence)
{
  auto const f = [](std::span<double const> x) {
    return std::sin(2 * std::numbers::pi * x[0]) * std::sin(2 * std::numbers::pi * x[1]);
  };
  double err[2];
  for (int n : {6, 7})
  {
    dof_map const dofs(2, 1, n, grid_kind::sparse);
    Vector const c = project_l2(f, dofs);
    // Parseval: ||f - P f||^2 = ||f||^2 - ||c||^2 with ||f||^2 = 1/4
    err[n - 6] = std::sqrt(std::max(0.0, 0.25 - c.squaredNorm()));
  }
  double const ratio = err[0] / err[1];
  EXPECT_GE(ratio, 3.5);
  EXPECT_LE(ratio, 4.5);
}

TEST(Projection, Idempotent)
{
  dof_map const dofs(2, 2, 4, grid_kind::sparse);
  Vector const c = random_vector(dofs.size(), 3);
  auto const field = to_fullgrid(c, dofs);
  Vector const again = project_l2([&](std::span<double const> x) { return field.eval(x); }, dofs);
  EXPECT_LT((again - c).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FullGrid, ConstantMode)
{
  dof_map const dofs(2, 1, 3, grid_kind::sparse);
  Vector c = Vector::Zero(dofs.size());
  c[0]     = 1.0;
  auto const g = to_fullgrid(c, dofs);
  for (double x : {0.05, 0.5, 0.95})
  {
    double const p[] = {x, 1.0 - x};
    EXPECT_NEAR(g.eval(p), 1.0, 1e-13);
  }
}

TEST(FullGrid, Roundtrip)
{
  for (auto kind : {grid_kind::sparse, grid_kind::full})
  {
    dof_map const dofs(2, 1, 6, kind);
    Vector const c = random_vector(dofs.size(), 11);
    Vector const back = from_fullgrid(to_fullgrid(c, dofs), dofs);
    EXPECT_LT((back - c).cwiseAbs().maxCoeff(), 1e-12);
  }
  dof_map const d3(3, 2, 4, grid_kind::sparse);
  Vector const c3 = random_vector(d3.size(), 5);
  EXPECT_LT((from_fullgrid(to_fullgrid(c3, d3), d3) - c3).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FullGrid, ProductOfCoordinatesAtGaussPoints)
{
  dof_map const dofs(2, 1, 4, grid_kind::sparse);
  Vector const c =
      project_l2([](std::span<double const> x) { return x[0] * x[1]; }, dofs);
  auto const g = to_fullgrid(c, dofs);
  cell_quadrature const quad(2, 1, 4, 3);
  for (int cx = 0; cx < 16; cx += 5)
  {
    for (int cy = 0; cy < 16; cy += 3)
    {
      int const cell[] = {cx, cy};
      for (std::int64_t p = 0; p < quad.points_per_cell(); ++p)
      {
        double x[2];
        quad.point_coords(cell, p, x);
        EXPECT_NEAR(g.eval(x), x[0] * x[1], 1e-12);
      }
    }
  }
}

TEST(FullGrid, ParsevalUpTo3D)
{
  for (int d = 1; d <= 3; ++d)
  {
    dof_map const dofs(d, 1, 5, grid_kind::sparse);
    Vector const c = random_vector(dofs.size(), 17 + d);
    auto const g   = to_fullgrid(c, dofs);
    // finest-grid quadrature of u^2 from independent point evaluation
    cell_quadrature const quad(d, 1, 5, 2);
    std::int64_t cells = 1;
    for (int m = 0; m < d; ++m)
    {
      cells *= quad.cells_per_dim();
    }
    double const vol = std::pow(quad.cell_width(), d);
    double sum = 0.0;
    std::vector<int> cell(d);
    std::vector<double> x(d);
    for (std::int64_t cc = 0; cc < cells; ++cc)
    {
      cell_from_flat(cc, d, quad.cells_per_dim(), cell);
      for (std::int64_t p = 0; p < quad.points_per_cell(); ++p)
      {
        quad.point_coords(cell, p, x);
        double w = vol;
        std::int64_t rem = p;
        for (int m = d - 1; m >= 0; --m)
        {
          w *= quad.rule().weights[rem % quad.points()];
          rem /= quad.points();
        }
        double const v = g.eval(x);
        sum += w * v * v;
      }
    }
    EXPECT_NEAR(std::sqrt(sum), c.norm(), 1e-10 * c.norm());
  }
}

TEST(EvalPoint, MatchesFullGrid)
{
  dof_map const dofs(2, 2, 4, grid_kind::sparse);
  Vector const c = random_vector(dofs.size(), 23);
  auto const g   = to_fullgrid(c, dofs);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 50; ++i)
  {
    double const x[] = {u(rng), u(rng)};
    EXPECT_NEAR(eval_point(c, dofs, x), g.eval(x), 1e-12);
  }
  double const out[] = {1.2, 0.5};
  EXPECT_ANY_THROW(eval_point(c, dofs, out));
}
