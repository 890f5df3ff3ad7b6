#include "obsopt/kernels.hpp"
#include "oracles/oracles.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

using namespace obsopt;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const KernelFamily all_families[] = { KernelFamily::gaussian2, KernelFamily::gaussian4,
                                      KernelFamily::epanechnikov };

} // namespace

TEST_CASE("kernel evaluation examples", "[kernels]")
{
  for (std::size_t dim : { 1u, 2u, 5u }) {
    const std::vector<double> zero(dim, 0.0);
    CHECK(kernel_eval(KernelSpec::make(KernelFamily::gaussian2, dim), zero) == 1.0);
  }
  const double g4[] = { 0.0 };
  CHECK(kernel_eval(KernelSpec::make(KernelFamily::gaussian4, 1), g4) == 1.5);
  const double outside[] = { 0.3, 1.0 };
  CHECK(kernel_eval(KernelSpec::make(KernelFamily::epanechnikov, 2), outside) == 0.0);
  const double far[] = { -1.7 };
  CHECK(kernel_eval(KernelSpec::make(KernelFamily::epanechnikov, 1), far) == 0.0);
  const double one[] = { 0.5 };
  CHECK_THROWS(kernel_eval(KernelSpec::make(KernelFamily::gaussian2, 2), one));
}

TEST_CASE("kernel evaluation matches textbook formulas", "[kernels][property]")
{
  for (auto family : all_families) {
    const auto spec = KernelSpec::make(family, 3);
    for (double a = -2.5; a <= 2.5; a += 0.37) {
      for (double b = -1.3; b <= 1.3; b += 0.41) {
        const double u[] = { a, b, 0.5 * a - b };
        const double expect =
          oracle::kernel_1d(family, u[0]) * oracle::kernel_1d(family, u[1]) *
          oracle::kernel_1d(family, u[2]);
        CHECK_THAT(kernel_eval(spec, u), WithinAbs(expect, 1e-14));
      }
    }
  }
}

TEST_CASE("kernel_vanishes agrees with the factor", "[kernels][property]")
{
  for (auto family : all_families) {
    for (double u = -60.0; u <= 60.0; u += 0.0625) {
      if (kernel_vanishes(family, u))
        CHECK(kernel_factor(family, u) == 0.0);
      else if (family != KernelFamily::gaussian4 && u * u < 1480.0)
        CHECK(kernel_factor(family, u) > 0.0);
    }
    CHECK_FALSE(kernel_vanishes(family, 0.0));
  }
  CHECK(kernel_vanishes(KernelFamily::epanechnikov, 1.0));
  CHECK(kernel_vanishes(KernelFamily::epanechnikov, -1.0));
  CHECK_FALSE(kernel_vanishes(KernelFamily::gaussian2, 38.0));
  CHECK(kernel_vanishes(KernelFamily::gaussian2, 39.0));
}

TEST_CASE("kernel moments examples", "[kernels]")
{
  const int a0[] = { 0 };
  const int a1[] = { 1 };
  const int a2[] = { 2 };
  const double root2pi = std::sqrt(2.0 * std::numbers::pi);
  CHECK_THAT(kernel_moment(KernelSpec::make(KernelFamily::gaussian2, 1), a1), WithinAbs(0.0, 1e-8));
  CHECK_THAT(kernel_moment(KernelSpec::make(KernelFamily::gaussian4, 1), a2), WithinAbs(0.0, 1e-8));
  CHECK_THAT(kernel_moment(KernelSpec::make(KernelFamily::gaussian2, 1), a0), WithinAbs(root2pi, 1e-8));
  CHECK_THAT(kernel_moment(KernelSpec::make(KernelFamily::epanechnikov, 1), a0),
             WithinAbs(4.0 / 3.0, 1e-12));
  CHECK_THROWS(kernel_moment(KernelSpec::make(KernelFamily::gaussian2, 2), a0));
}

TEST_CASE("kernel moments agree with Simpson quadrature", "[kernels][property]")
{
  for (auto family : all_families) {
    const auto spec = KernelSpec::make(family, 1);
    for (int a = 0; a <= 6; ++a) {
      const int idx[] = { a };
      CHECK_THAT(kernel_moment(spec, idx), WithinAbs(oracle::moment_1d(family, a), 1e-8));
    }
  }
}

TEST_CASE("moments below the declared order vanish in every dimension", "[kernels][property]")
{
  for (auto family : all_families) {
    for (std::size_t dim = 1; dim <= 3; ++dim) {
      const auto spec = KernelSpec::make(family, dim);
      const int s = spec.order;
      std::vector<int> idx(dim, 0);
      // enumerate all multi-indices with entries below s
      for (;;) {
        int total = 0;
        for (int v : idx)
          total += v;
        const double m = kernel_moment(spec, idx);
        if (total == 0) {
          CHECK(m > 0.0);
          CHECK(std::isfinite(m));
        } else if (total < s) {
          CHECK_THAT(m, WithinAbs(0.0, 1e-6));
        }
        std::size_t c = 0;
        while (c < dim && ++idx[c] == s)
          idx[c++] = 0;
        if (c == dim)
          break;
      }
    }
  }
}

TEST_CASE("declared orders", "[kernels]")
{
  CHECK(family_order(KernelFamily::gaussian2) == 2);
  CHECK(family_order(KernelFamily::gaussian4) == 4);
  CHECK(family_order(KernelFamily::epanechnikov) == 2);
  auto spec = KernelSpec::make(KernelFamily::gaussian4, 2);
  spec.order = 2;
  CHECK_THROWS(spec.validate());
  CHECK(parse_kernel_family("epanechnikov") == KernelFamily::epanechnikov);
  CHECK_THROWS(parse_kernel_family("triangular"));
}

TEST_CASE("marginal integrals", "[kernels]")
{
  const double root_pi = std::sqrt(std::numbers::pi);
  const auto g2 = marginal_integrals(KernelFamily::gaussian2);
  CHECK_THAT(g2.mass, WithinRel(std::sqrt(2.0) * root_pi, 1e-12));
  CHECK_THAT(g2.square, WithinRel(root_pi, 1e-12));
  CHECK_THAT(g2.derivative_square, WithinRel(root_pi / 2.0, 1e-12));
  const auto ep = marginal_integrals(KernelFamily::epanechnikov);
  CHECK_THAT(ep.mass, WithinRel(4.0 / 3.0, 1e-12));
  CHECK_THAT(ep.square, WithinRel(16.0 / 15.0, 1e-12));
  CHECK_THAT(ep.derivative_square, WithinRel(8.0 / 3.0, 1e-12));
  const auto g4 = marginal_integrals(KernelFamily::gaussian4);
  const double sq = oracle::simpson([](double u) {
    const double k = oracle::kernel_1d(KernelFamily::gaussian4, u);
    return k * k;
  }, -14.0, 14.0, 20000);
  CHECK_THAT(g4.square, WithinRel(sq, 1e-9));
}

TEST_CASE("bandwidth rule", "[kernels]")
{
  auto spec = KernelSpec::make(KernelFamily::gaussian2, 2, BandwidthRule::rate(0.1));
  const double h256 = bandwidth(spec, 256);
  CHECK_THAT(h256, WithinAbs(0.1 * std::pow(256.0 * std::log(256.0), -1.0 / 7.0), 1e-15));
  CHECK_THAT(h256, WithinAbs(0.0354562, 1e-7));
  spec.bandwidth = BandwidthRule::rate(2.5);
  CHECK_THAT(bandwidth(spec, 256), WithinRel(25.0 * h256, 1e-14));
  spec.bandwidth = BandwidthRule::fixed(0.5);
  CHECK(bandwidth(spec, 1) == 0.5);
  CHECK(bandwidth(spec, 100000) == 0.5);
  spec.bandwidth = BandwidthRule::rate(1.0);
  CHECK_THROWS(bandwidth(spec, 1));
  double last = bandwidth(spec, 2);
  for (std::size_t n = 3; n < 5000; n = n * 3 / 2 + 1) {
    const double h = bandwidth(spec, n);
    CHECK(h < last);
    last = h;
  }
  CHECK(BandwidthRule::parse("fixed:0.25").kind == BandwidthRule::Kind::fixed);
  CHECK(BandwidthRule::parse("rate:2.5").value == 2.5);
  CHECK_THROWS(BandwidthRule::parse("rate:-1"));
  CHECK_THROWS(BandwidthRule::parse("silverman"));
}

TEST_CASE("order warning and default family", "[kernels]")
{
  CHECK(required_order(1) == 2);
  CHECK(required_order(2) == 3);
  CHECK(required_order(5) == 5);
  CHECK(default_family(1) == KernelFamily::gaussian2);
  CHECK(default_family(2) == KernelFamily::gaussian4);
  CHECK_FALSE(order_warning(KernelSpec::make(KernelFamily::gaussian2, 2), 1).has_value());
  CHECK(order_warning(KernelSpec::make(KernelFamily::gaussian2, 3), 2).has_value());
  CHECK_FALSE(order_warning(KernelSpec::make(KernelFamily::gaussian4, 3), 2).has_value());
}
