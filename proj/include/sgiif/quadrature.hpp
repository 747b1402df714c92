#pragma once

#include <vector>

namespace sgiif
{
/// Gauss-Legendre rule on [0,1].
struct quadrature_rule
{
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// q-point Gauss-Legendre rule mapped to [0,1], exact for degree 2q-1.
/// Supports 1 <= q <= 16.
quadrature_rule gauss_rule(int q);

/// Legendre polynomial P_n(x) on [-1,1] and its derivative.
void legendre(int n, double x, double &value, double &derivative);

/// Legendre polynomial scaled to unit L2 norm on [0,1]: sqrt(2n+1) P_n(2s-1).
double shifted_legendre(int n, double s);
double shifted_legendre_derivative(int n, double s);

} // namespace sgiif
