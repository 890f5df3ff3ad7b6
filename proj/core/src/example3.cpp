#include "obsopt/example3.hpp"
#include "obsopt/regression.hpp"
#include "obsopt/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace obsopt {

void Example3Spec::validate() const
{
  if (!(tau2 > 0.0) || !std::isfinite(tau2))
    throw std::invalid_argument("tau2 must be positive");
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    throw std::invalid_argument("sigma must be non-negative");
}

double Example3Spec::predictive_intercept() const
{
  return 27.75 - 9.0 * tau2 / (9.0 + tau2);
}

double Example3Spec::predictive_curvature() const
{
  const double s = 9.0 + tau2;
  return 1.0 - 18.0 / s + 81.0 / (s * s);
}

ObservationalDataset gen_example3(const Example3Spec& spec, std::size_t n, std::uint64_t seed)
{
  spec.validate();
  if (n == 0)
    throw std::invalid_argument("sample size must be positive");
  const double tau = std::sqrt(spec.tau2);
  const auto rows = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd x(rows, 1);
  Eigen::VectorXd z(rows), y(rows);
  Rng rng(seed);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double xi = rng.normal();
    const double w = tau * rng.normal();
    const double v = spec.sigma * rng.normal();
    x(i, 0) = xi;
    z(i) = 3.0 * xi + w;
    y(i) = Example3Spec::outcome(z(i), xi, v);
  }
  return ObservationalDataset(std::move(x), std::move(z), std::move(y));
}

ResponseOracle oracle_example3(const Example3Spec& spec)
{
  spec.validate();
  const double a = spec.predictive_intercept();
  const double b = spec.predictive_curvature();
  return { [](double z) { return 18.75 - z * z; },
           [a, b](double z) { return a - b * z * z; },
           [spec](std::size_t n, std::uint64_t seed) { return gen_example3(spec, n, seed); } };
}

ObservationalDataset gen_example4(std::size_t n, std::uint64_t seed)
{
  if (n == 0)
    throw std::invalid_argument("sample size must be positive");
  const auto rows = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd x(rows, 2);
  Eigen::VectorXd z(rows), y(rows);
  Rng rng(seed);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double x1 = rng.normal();
    const double x2 = rng.normal();
    const double u = rng.normal();
    x(i, 0) = x1;
    x(i, 1) = x2;
    z(i) = std::exp(1.5 + 0.2 * x1 - 0.1 * x2 + 0.15 * u);
    const double p = logistic(3.0 - 0.8 * z(i) + 0.5 * x1 - 0.3 * x2);
    y(i) = rng.uniform() < p ? 1.0 : 0.0;
  }
  return ObservationalDataset(std::move(x), std::move(z), std::move(y));
}

} // namespace obsopt
