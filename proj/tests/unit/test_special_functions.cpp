#include "obsopt/quadrature.hpp"
#include "obsopt/special_functions.hpp"
#include "oracles/oracles.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace obsopt;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("chi-squared with one degree of freedom", "[special]")
{
  CHECK(chi_squared_cdf(0.0) == 0.0);
  CHECK(chi_squared_sf(0.0) == 1.0);
  CHECK_THAT(chi_squared_sf(3.841458820694124), WithinAbs(0.05, 1e-12));
  CHECK_THAT(chi_squared_cdf(6.634896601021214), WithinAbs(0.99, 1e-12));
  for (double x = 0.01; x < 60.0; x *= 1.3) {
    CHECK_THAT(chi_squared_sf(x), WithinAbs(oracle::chi2_1_sf(x), 1e-10));
    CHECK_THAT(chi_squared_cdf(x) + chi_squared_sf(x), WithinAbs(1.0, 1e-14));
  }
  CHECK_THAT(chi_squared_sf(100.0), WithinRel(oracle::chi2_1_sf(100.0), 1e-8));
}

TEST_CASE("chi-squared CDF is monotone", "[special][property]")
{
  double last = 0.0;
  for (double x = 0.0; x < 40.0; x += 0.05) {
    const double f = chi_squared_cdf(x);
    CHECK(f >= last);
    CHECK(f <= 1.0);
    last = f;
  }
}

TEST_CASE("incomplete gamma closed forms", "[special]")
{
  for (double x : { 0.1, 0.5, 1.0, 2.0, 5.0, 20.0 }) {
    CHECK_THAT(gamma_p(1.0, x), WithinAbs(1.0 - std::exp(-x), 1e-13));
    CHECK_THAT(gamma_q(1.0, x), WithinRel(std::exp(-x), 1e-12));
    CHECK_THAT(gamma_q(2.0, x), WithinRel((1.0 + x) * std::exp(-x), 1e-12));
    CHECK_THAT(chi_squared_cdf(x, 2.0), WithinAbs(1.0 - std::exp(-x / 2.0), 1e-13));
  }
  CHECK_THROWS(gamma_p(0.0, 1.0));
  CHECK_THROWS(gamma_p(1.0, -1.0));
}

TEST_CASE("Gauss-Hermite rule", "[quadrature]")
{
  const auto rule = gauss_hermite(20);
  REQUIRE(rule.nodes.size() == 20);
  double mass = 0.0, second = 0.0, fourth = 0.0, cosine = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double x = rule.nodes[i], w = rule.weights[i];
    mass += w;
    second += w * x * x;
    fourth += w * x * x * x * x;
    cosine += w * std::cos(x);
  }
  const double root_pi = std::sqrt(std::numbers::pi);
  CHECK_THAT(mass, WithinRel(root_pi, 1e-13));
  CHECK_THAT(second, WithinRel(root_pi / 2.0, 1e-13));
  CHECK_THAT(fourth, WithinRel(3.0 * root_pi / 4.0, 1e-13));
  CHECK_THAT(cosine, WithinRel(root_pi * std::exp(-0.25), 1e-12));
}

TEST_CASE("Gauss-Legendre rule", "[quadrature]")
{
  for (std::size_t m : { 1u, 2u, 5u, 16u }) {
    const auto rule = gauss_legendre(m);
    for (std::size_t d = 0; d < 2 * m; ++d) {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i)
        s += rule.weights[i] * std::pow(rule.nodes[i], static_cast<double>(d));
      const double exact = d % 2 ? 0.0 : 2.0 / static_cast<double>(d + 1);
      CHECK_THAT(s, WithinAbs(exact, 1e-13));
    }
  }
}
