#pragma once

#include <vector>

#include "svfem/types.hpp"

namespace svfem {

/// Quadrature rule on the reference triangle {x, y >= 0, x + y <= 1} or on
/// the reference edge [0, 1] (points then carry the parameter in x()).
struct QuadRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
  int exact_degree = 0;

  int size() const { return static_cast<int>(weights.size()); }
};

/// Rule exact for polynomials of total degree <= degree, 0 <= degree <= 20.
/// Symmetric Gauss rules up to degree 6, collapsed Gauss-Jacobi above.
QuadRule triangle_rule(int degree);

/// Gauss-Legendre rule on [0, 1] exact up to degree, 0 <= degree <= 40.
QuadRule edge_rule(int degree);

/// Collapsed (Duffy) tensor rule for any degree; exposed for tests.
QuadRule collapsed_triangle_rule(int degree);

/// n-point Gauss-Jacobi rule for weight (1-t)^alpha (1+t)^beta on [-1, 1].
void gauss_jacobi(int n, double alpha, double beta, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace svfem
