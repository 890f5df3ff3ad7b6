#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace obsopt {

enum class KernelFamily
{
  gaussian2,    //!< exp(-u^2/2), order 2
  gaussian4,    //!< (3/2 - u^2/2) exp(-u^2/2), order 4 (bias-reducing)
  epanechnikov  //!< max(0, 1 - u^2), order 2, compact support
};

KernelFamily parse_kernel_family(const std::string& name);
std::string to_string(KernelFamily family);

//! Order s of the 1-d family member: all moments of degree < s vanish.
int family_order(KernelFamily family);

//! Bandwidth rule: h = c (n log n)^(-1/7) with natural log, or a fixed h.
struct BandwidthRule
{
  enum class Kind
  {
    rate,
    fixed
  };

  Kind kind = Kind::rate;
  double value = 1.0;

  static BandwidthRule rate(double c_scale);
  static BandwidthRule fixed(double h);

  //! Parses "rate:<c>" or "fixed:<h>".
  static BandwidthRule parse(const std::string& text);
  std::string str() const;
};

//! Product kernel on R^dim built from one 1-d family member per coordinate,
//! with unit bandwidth (callers pass scaled arguments u / h).
struct KernelSpec
{
  KernelFamily family = KernelFamily::gaussian2;
  std::size_t dim = 1;
  int order = 2;
  BandwidthRule bandwidth = BandwidthRule::rate(1.0);

  //! Builds a spec whose order is the family's order.
  static KernelSpec make(KernelFamily family,
                         std::size_t dim,
                         BandwidthRule rule = BandwidthRule::rate(1.0));

  //! Throws std::invalid_argument if dim == 0 or the declared order does not
  //! match the family.
  void validate() const;

  KernelSpec with_dim(std::size_t d) const;
};

//! 1-d family member k(u).
double kernel_factor(KernelFamily family, double u);

//! True when kernel_factor(family, u) is exactly zero because u lies outside
//! the effective support: |u| >= 1 for epanechnikov, and u^2 > 1492 for the
//! gaussian families, where exp(-u^2/2) underflows to zero. Monotone in |u|.
bool kernel_vanishes(KernelFamily family, double u);

//! Polynomial multiplier of the gaussian families (1 for epanechnikov).
double kernel_polynomial(KernelFamily family, double u);

//! True if k(u) = polynomial(u) * exp(-u^2/2).
bool has_gaussian_envelope(KernelFamily family);

//! K(u) = k(u_0) * (k(u_1) * ... * k(u_{dim-1})).
//!
//! The decision coordinate u_0 multiplies the product of the covariate
//! factors, which are accumulated left to right. Estimators that cache the
//! covariate part rely on this association order.
double kernel_eval(const KernelSpec& spec, std::span<const double> u);

//! Integral of K(u) u^alpha over R^dim by Gauss-Hermite (gaussian families) or
//! Gauss-Legendre (epanechnikov) quadrature.
double kernel_moment(const KernelSpec& spec, std::span<const int> multi_index);

//! Integral of k(u)^2 and k'(u)^2 for the 1-d member, plus its total mass.
struct MarginalIntegrals
{
  double mass;               //!< int k
  double square;             //!< int k^2
  double derivative_square;  //!< int k'^2
};
MarginalIntegrals marginal_integrals(KernelFamily family);

//! Bandwidth for a sample of size n. The rate rule needs n >= 2.
double bandwidth(const KernelSpec& spec, std::size_t n);

//! Kernel order needed for k covariates (k+1 when k <= 2, else k).
int required_order(std::size_t covariates);

//! Notice when the kernel's order is below required_order(covariates).
std::optional<std::string> order_warning(const KernelSpec& spec,
                                         std::size_t covariates);

//! gaussian2 for k <= 1 covariates, gaussian4 otherwise.
KernelFamily default_family(std::size_t covariates);

} // namespace obsopt
