#include "obsopt/kernels.hpp"
#include "obsopt/core.hpp"
#include "obsopt/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace obsopt {

KernelFamily parse_kernel_family(const std::string& name)
{
  if (name == "gaussian2")
    return KernelFamily::gaussian2;
  if (name == "gaussian4")
    return KernelFamily::gaussian4;
  if (name == "epanechnikov")
    return KernelFamily::epanechnikov;
  throw std::invalid_argument("unknown kernel '" + name +
                              "' (gaussian2|gaussian4|epanechnikov)");
}

std::string to_string(KernelFamily family)
{
  switch (family) {
    case KernelFamily::gaussian2:
      return "gaussian2";
    case KernelFamily::gaussian4:
      return "gaussian4";
    case KernelFamily::epanechnikov:
      return "epanechnikov";
  }
  return "?";
}

int family_order(KernelFamily family)
{
  return family == KernelFamily::gaussian4 ? 4 : 2;
}

// -- bandwidth rule -------------------------------------------------------------

BandwidthRule BandwidthRule::rate(double c_scale)
{
  if (!(c_scale > 0.0) || !std::isfinite(c_scale))
    throw std::invalid_argument("bandwidth scale must be positive");
  return { Kind::rate, c_scale };
}

BandwidthRule BandwidthRule::fixed(double h)
{
  if (!(h > 0.0) || !std::isfinite(h))
    throw std::invalid_argument("fixed bandwidth must be positive");
  return { Kind::fixed, h };
}

BandwidthRule BandwidthRule::parse(const std::string& text)
{
  if (text.rfind("rate:", 0) == 0)
    return rate(parse_setting(text.substr(5), "bandwidth scale"));
  if (text.rfind("fixed:", 0) == 0)
    return fixed(parse_setting(text.substr(6), "bandwidth"));
  throw std::invalid_argument("bandwidth must be 'rate:<c>' or 'fixed:<h>', got '" +
                              text + "'");
}

std::string BandwidthRule::str() const
{
  return (kind == Kind::rate ? "rate:" : "fixed:") + format_number(value);
}

// -- spec -------------------------------------------------------------------------

KernelSpec KernelSpec::make(KernelFamily family, std::size_t dim, BandwidthRule rule)
{
  KernelSpec spec{ family, dim, family_order(family), rule };
  spec.validate();
  return spec;
}

void KernelSpec::validate() const
{
  if (dim == 0)
    throw std::invalid_argument("kernel dimension must be positive");
  if (order != family_order(family))
    throw std::invalid_argument("kernel " + to_string(family) + " has order " +
                                std::to_string(family_order(family)) +
                                ", declared " + std::to_string(order));
}

KernelSpec KernelSpec::with_dim(std::size_t d) const
{
  KernelSpec out = *this;
  out.dim = d;
  out.validate();
  return out;
}

// -- evaluation ---------------------------------------------------------------------

double kernel_polynomial(KernelFamily family, double u)
{
  switch (family) {
    case KernelFamily::gaussian2:
      return 1.0;
    case KernelFamily::gaussian4:
      return 1.5 - 0.5 * u * u;
    case KernelFamily::epanechnikov:
      return 1.0;
  }
  return 1.0;
}

bool has_gaussian_envelope(KernelFamily family)
{
  return family != KernelFamily::epanechnikov;
}

bool kernel_vanishes(KernelFamily family, double u)
{
  if (family == KernelFamily::epanechnikov)
    return !(1.0 - u * u > 0.0);
  // exp(-u^2/2) rounds to zero once u^2/2 exceeds about 745.2
  return u * u > 1492.0;
}

double kernel_factor(KernelFamily family, double u)
{
  if (kernel_vanishes(family, u))
    return 0.0;
  switch (family) {
    case KernelFamily::gaussian2:
      return std::exp(-0.5 * u * u);
    case KernelFamily::gaussian4:
      return (1.5 - 0.5 * u * u) * std::exp(-0.5 * u * u);
    case KernelFamily::epanechnikov:
      return 1.0 - u * u;
  }
  return 0.0;
}

double kernel_eval(const KernelSpec& spec, std::span<const double> u)
{
  if (u.size() != spec.dim)
    throw std::invalid_argument("kernel argument has length " +
                                std::to_string(u.size()) + ", expected " +
                                std::to_string(spec.dim));
  const double decision = kernel_factor(spec.family, u[0]);
  if (u.size() == 1)
    return decision;
  double covariates = kernel_factor(spec.family, u[1]);
  for (std::size_t c = 2; c < u.size(); ++c)
    covariates *= kernel_factor(spec.family, u[c]);
  return decision * covariates;
}

// -- moments ------------------------------------------------------------------------

namespace {

double moment_1d(KernelFamily family, int alpha)
{
  if (alpha < 0)
    throw std::invalid_argument("moment exponents must be non-negative");
  if (has_gaussian_envelope(family)) {
    // int p(u) u^a e^{-u^2/2} du = sqrt(2) int p(sqrt2 x) (sqrt2 x)^a e^{-x^2} dx
    const std::size_t m = static_cast<std::size_t>(alpha / 2 + 8);
    const auto rule = gauss_hermite(m);
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double u = std::numbers::sqrt2 * rule.nodes[i];
      sum += rule.weights[i] * kernel_polynomial(family, u) * std::pow(u, alpha);
    }
    return std::numbers::sqrt2 * sum;
  }
  const std::size_t m = static_cast<std::size_t>(alpha / 2 + 4);
  const auto rule = gauss_legendre(m);
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double u = rule.nodes[i];
    sum += rule.weights[i] * (1.0 - u * u) * std::pow(u, alpha);
  }
  return sum;
}

} // namespace

double kernel_moment(const KernelSpec& spec, std::span<const int> multi_index)
{
  if (multi_index.size() != spec.dim)
    throw std::invalid_argument("multi-index length must equal kernel dimension");
  double out = 1.0;
  for (int a : multi_index)
    out *= moment_1d(spec.family, a);
  return out;
}

MarginalIntegrals marginal_integrals(KernelFamily family)
{
  if (!has_gaussian_envelope(family)) {
    // k = 1 - u^2 and k' = -2u on [-1, 1]
    const auto rule = gauss_legendre(8);
    MarginalIntegrals out{ 0.0, 0.0, 0.0 };
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double u = rule.nodes[i];
      const double w = rule.weights[i];
      out.mass += w * (1.0 - u * u);
      out.square += w * (1.0 - u * u) * (1.0 - u * u);
      out.derivative_square += w * 4.0 * u * u;
    }
    return out;
  }
  // k = p(u) e^{-u^2/2}, so k^2 and k'^2 carry the Hermite weight e^{-u^2}
  const auto rule = gauss_hermite(24);
  MarginalIntegrals out{ moment_1d(family, 0), 0.0, 0.0 };
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double u = rule.nodes[i];
    const double p = kernel_polynomial(family, u);
    const double dp = family == KernelFamily::gaussian4 ? -u : 0.0;
    const double dk = dp - u * p;
    out.square += rule.weights[i] * p * p;
    out.derivative_square += rule.weights[i] * dk * dk;
  }
  return out;
}

// -- bandwidth ------------------------------------------------------------------------

double bandwidth(const KernelSpec& spec, std::size_t n)
{
  if (spec.bandwidth.kind == BandwidthRule::Kind::fixed)
    return spec.bandwidth.value;
  if (n < 2)
    throw std::invalid_argument("rate bandwidth rule needs n >= 2");
  const double nn = static_cast<double>(n);
  return spec.bandwidth.value * std::pow(nn * std::log(nn), -1.0 / 7.0);
}

int required_order(std::size_t covariates)
{
  const int k = static_cast<int>(covariates);
  return k <= 2 ? k + 1 : k;
}

std::optional<std::string> order_warning(const KernelSpec& spec,
                                         std::size_t covariates)
{
  const int need = required_order(covariates);
  if (spec.order >= need)
    return std::nullopt;
  return "kernel " + to_string(spec.family) + " has order " +
         std::to_string(spec.order) + " but " + std::to_string(covariates) +
         " covariates call for order >= " + std::to_string(need) +
         "; the bandwidth rate conditions for asymptotic normality do not hold";
}

KernelFamily default_family(std::size_t covariates)
{
  return covariates >= 2 ? KernelFamily::gaussian4 : KernelFamily::gaussian2;
}

} // namespace obsopt
