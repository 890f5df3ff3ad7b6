#include "obsopt/example3.hpp"
#include "obsopt/rng.hpp"
#include "oracles/oracles.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace obsopt;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("Example 3 predictive coefficients", "[example3]")
{
  const Example3Spec spec;
  CHECK_THAT(spec.predictive_intercept(), WithinAbs(22.108, 1e-3));
  CHECK_THAT(spec.predictive_curvature(), WithinAbs(0.393, 1e-3));
  const auto oracle = oracle_example3(spec);
  for (double z : { -3.0, 0.0, 1.7, 4.33, 8.0 }) {
    CHECK_THAT(oracle.predictive_response(z), WithinAbs(oracle::example3_predictive(z, spec.tau2), 1e-12));
    CHECK_THAT(oracle.mean_response(z), WithinAbs(18.75 - z * z, 1e-12));
  }
  Example3Spec bad;
  bad.tau2 = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.tau2 = 1.0;
  bad.sigma = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("Example 3 sampler follows its draw order", "[example3]")
{
  const Example3Spec spec;
  const auto data = gen_example3(spec, 200, 42);
  REQUIRE(data.size() == 200);
  REQUIRE(data.x().cols() == 1);
  Rng rng(42);
  for (Eigen::Index i = 0; i < 200; ++i) {
    const double x = rng.normal();
    const double w = rng.normal();
    const double v = rng.normal();
    const double z = 3.0 * x + std::sqrt(spec.tau2) * w;
    CHECK(data.x()(i, 0) == x);
    CHECK_THAT(data.z()(i), WithinRel(z, 1e-15));
    CHECK_THAT(data.y()(i), WithinAbs(Example3Spec::outcome(data.z()(i), x, spec.sigma * v), 1e-12));
  }
}

TEST_CASE("Example 3 sampler without outcome noise", "[example3]")
{
  Example3Spec spec;
  spec.sigma = 0.0;
  const auto data = gen_example3(spec, 500, 3);
  for (Eigen::Index i = 0; i < 500; ++i)
    CHECK(data.y()(i) == Example3Spec::outcome(data.z()(i), data.x()(i, 0), 0.0));
}

TEST_CASE("Example 3 sampler moments", "[example3][property]")
{
  const Example3Spec spec;
  const auto data = gen_example3(spec, 1000000, 11);
  const double mean = data.z().mean();
  const double var = (data.z().array() - mean).square().mean();
  CHECK_THAT(mean, WithinAbs(0.0, 0.05));
  CHECK_THAT(var, WithinAbs(9.0 + spec.tau2, 0.3));
  // Y at the historical price: E[Y] = 27.75 - E[Z^2] + 6 E[XZ] - 9 = 27.75 - 24.1234 + 18 - 9
  CHECK_THAT(data.y().mean(), WithinAbs(27.75 - (9.0 + spec.tau2) + 18.0 - 9.0, 0.1));
  const double xz = (data.x().col(0).array() * data.z().array()).mean();
  CHECK_THAT(xz, WithinAbs(3.0, 0.02));
}

TEST_CASE("Example 3 sampler is deterministic", "[example3]")
{
  const auto a = gen_example3({}, 300, 9);
  const auto b = gen_example3({}, 300, 9);
  const auto c = gen_example3({}, 300, 10);
  CHECK(a.z() == b.z());
  CHECK(a.y() == b.y());
  CHECK(a.x() == b.x());
  CHECK(a.z() != c.z());
}

TEST_CASE("Example 4 synthetic instance", "[example3]")
{
  const auto data = gen_example4(5000, 4);
  REQUIRE(data.x().cols() == 2);
  for (Eigen::Index i = 0; i < data.z().size(); ++i) {
    CHECK(data.z()(i) > 0.0);
    CHECK((data.y()(i) == 0.0 || data.y()(i) == 1.0));
  }
  // ln Z has mean 1.5 and variance 0.04 + 0.01 + 0.0225
  const Eigen::ArrayXd lz = data.z().array().log();
  CHECK_THAT(lz.mean(), WithinAbs(1.5, 0.02));
  CHECK_THAT((lz - lz.mean()).square().mean(), WithinAbs(0.0725, 0.006));
  const double rate = data.y().mean();
  CHECK(rate > 0.05);
  CHECK(rate < 0.95);
}
