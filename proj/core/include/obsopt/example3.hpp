#pragma once

#include "obsopt/core.hpp"

#include <cstddef>
#include <cstdint>

namespace obsopt {

//! Continuous pricing instance with one confounder X ~ N(0, 1):
//!
//!   Y(z) = 27.75 - z^2 + 6 X z - 9 X^2 + V,   V ~ N(0, sigma^2),
//!   historical prices Z = 3 X + W,             W ~ N(0, tau2).
struct Example3Spec
{
  double sigma = 1.0;
  double tau2 = 15.1234;

  //! Throws std::invalid_argument unless tau2 > 0 and sigma >= 0.
  void validate() const;

  //! E[Y | Z = z] = a - b z^2.
  double predictive_intercept() const;  //!< a = 27.75 - 9 tau2 / (9 + tau2)
  double predictive_curvature() const;  //!< b = 1 - 18/(9 + tau2) + 81/(9 + tau2)^2

  //! Y(z) for one unit.
  static double outcome(double z, double x, double v)
  {
    return 27.75 - z * z + 6.0 * x * z - 9.0 * x * x + v;
  }
};

//! n records drawn as (X, W, V) triples per row, in that order, from
//! Rng(seed).
ObservationalDataset gen_example3(const Example3Spec& spec, std::size_t n, std::uint64_t seed);

//! y(z) = 18.75 - z^2, E[Y | Z = z] = a - b z^2 and gen_example3 as sampler.
ResponseOracle oracle_example3(const Example3Spec& spec);

//! Synthetic binary-outcome instance shaped like consumer-loan pricing:
//! two covariates, a lognormal rate model and a logistic take-up model,
//!
//!   ln Z = 1.5 + 0.2 X1 - 0.1 X2 + 0.15 U,
//!   P(Y = 1 | X, Z) = logistic(3 - 0.8 Z + 0.5 X1 - 0.3 X2),
//!
//! with X1, X2, U iid standard normal.
ObservationalDataset gen_example4(std::size_t n, std::uint64_t seed);

} // namespace obsopt
