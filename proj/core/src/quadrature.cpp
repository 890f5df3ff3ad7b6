#include "obsopt/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace obsopt {

namespace {

// Golub-Welsch: nodes are the eigenvalues of the symmetric Jacobi matrix of
// the orthogonal polynomial recurrence, weights are mu0 * (first component)^2.
template<typename OffDiagonal>
QuadratureRule golub_welsch(std::size_t m, double mu0, OffDiagonal beta)
{
  if (m == 0)
    throw std::invalid_argument("quadrature rule needs at least one node");
  const auto n = static_cast<Eigen::Index>(m);
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 1; i < n; ++i) {
    const double b = beta(static_cast<double>(i));
    jacobi(i, i - 1) = b;
    jacobi(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  QuadratureRule rule;
  rule.nodes.resize(m);
  rule.weights.resize(m);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v0 = solver.eigenvectors()(0, i);
    rule.nodes[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
    rule.weights[static_cast<std::size_t>(i)] = mu0 * v0 * v0;
  }
  return rule;
}

} // namespace

QuadratureRule gauss_hermite(std::size_t m)
{
  return golub_welsch(m, std::sqrt(std::numbers::pi),
                      [](double i) { return std::sqrt(i / 2.0); });
}

QuadratureRule gauss_legendre(std::size_t m)
{
  return golub_welsch(m, 2.0, [](double i) {
    return i / std::sqrt(4.0 * i * i - 1.0);
  });
}

} // namespace obsopt
