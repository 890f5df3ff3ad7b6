#pragma once

namespace obsopt {

//! Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double gamma_p(double a, double x);

//! Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), evaluated
//! directly so small tails keep their relative accuracy.
double gamma_q(double a, double x);

//! CDF of the chi-squared distribution with `df` degrees of freedom.
double chi_squared_cdf(double x, double df = 1.0);

//! Survival function 1 - CDF.
double chi_squared_sf(double x, double df = 1.0);

} // namespace obsopt
