#include "sgiif/quadrature.hpp"

#include "sgiif/common.hpp"

#include <cmath>
#include <numbers>

namespace sgiif
{
void legendre(int n, double x, double &value, double &derivative)
{
  double p0 = 1.0;
  double p1 = x;
  if (n == 0)
  {
    value      = 1.0;
    derivative = 0.0;
    return;
  }
  for (int i = 2; i <= n; ++i)
  {
    double const p2 = ((2 * i - 1) * x * p1 - (i - 1) * p0) / i;
    p0              = p1;
    p1              = p2;
  }
  value = p1;
  // endpoints need the closed form; the usual identity divides by 1-x^2
  if (std::abs(1.0 - x * x) < 1e-14)
  {
    double const sign = (x > 0 || n % 2 == 1) ? 1.0 : -1.0;
    derivative        = sign * 0.5 * n * (n + 1);
    return;
  }
  derivative = n * (x * p1 - p0) / (x * x - 1.0);
}

double shifted_legendre(int n, double s)
{
  double v, dv;
  legendre(n, 2.0 * s - 1.0, v, dv);
  return std::sqrt(2.0 * n + 1.0) * v;
}

double shifted_legendre_derivative(int n, double s)
{
  double v, dv;
  legendre(n, 2.0 * s - 1.0, v, dv);
  return 2.0 * std::sqrt(2.0 * n + 1.0) * dv;
}

quadrature_rule gauss_rule(int q)
{
  expect(q >= 1 && q <= 16, "gauss_rule: supported point counts are 1..16");
  quadrature_rule rule;
  rule.nodes.resize(q);
  rule.weights.resize(q);
  for (int i = 0; i < q; ++i)
  {
    // Chebyshev initial guess, then Newton on P_q
    double x = std::cos(std::numbers::pi * (i + 0.75) / (q + 0.5));
    double value = 0, derivative = 1;
    for (int iter = 0; iter < 100; ++iter)
    {
      legendre(q, x, value, derivative);
      double const dx = value / derivative;
      x -= dx;
      if (std::abs(dx) < 1e-16)
      {
        break;
      }
    }
    legendre(q, x, value, derivative);
    double const w = 2.0 / ((1.0 - x * x) * derivative * derivative);
    // ascending order on [0,1]
    rule.nodes[q - 1 - i]   = 0.5 * (x + 1.0);
    rule.weights[q - 1 - i] = 0.5 * w;
  }
  return rule;
}

} // namespace sgiif
