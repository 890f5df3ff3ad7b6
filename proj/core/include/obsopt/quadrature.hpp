#pragma once

#include <cstddef>
#include <vector>

namespace obsopt {

struct QuadratureRule
{
  std::vector<double> nodes;
  std::vector<double> weights;
};

//! Gauss-Hermite rule for integrals of the form  int f(x) exp(-x^2) dx,
//! computed with the Golub-Welsch eigenvalue method. Exact for polynomial f
//! of degree < 2m.
QuadratureRule gauss_hermite(std::size_t m);

//! Gauss-Legendre rule on [-1, 1]. Exact for polynomials of degree < 2m.
QuadratureRule gauss_legendre(std::size_t m);

} // namespace obsopt
