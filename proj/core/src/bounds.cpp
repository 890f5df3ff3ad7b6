#include "obsopt/bounds.hpp"
#include "obsopt/error.hpp"
#include "obsopt/parallel.hpp"
#include "obsopt/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace obsopt {

namespace {

void check_unit(double v, const char* name)
{
  if (!(v >= 0.0 && v <= 1.0))
    throw std::invalid_argument(std::string(name) + " must lie in [0, 1], got " +
                                format_number(v));
}

} // namespace

double bound_thm2(double gamma)
{
  check_unit(gamma, "gamma");
  return 1.0 - 4.0 * gamma - 4.0 * gamma * std::sqrt(gamma) - gamma * gamma;
}

double bound_thm3(double demand_ratio)
{
  check_unit(demand_ratio, "demand ratio");
  return 1.0 - demand_ratio * demand_ratio;
}

double bound_thm4(double gamma)
{
  check_unit(gamma, "gamma");
  return 1.0 - 4.0 * gamma + 4.0 * gamma * std::sqrt(gamma) - gamma * gamma;
}

double bound_value(int theorem, double x)
{
  switch (theorem) {
    case 2:
      return bound_thm2(x);
    case 3:
      return bound_thm3(x);
    case 4:
      return bound_thm4(x);
    default:
      throw std::invalid_argument("theorem must be 2, 3 or 4, got " +
                                  std::to_string(theorem));
  }
}

std::vector<BoundPoint> bound_sweep(int theorem, double lo, double hi, double step)
{
  if (!(step > 0.0) || !(lo <= hi))
    throw std::invalid_argument("sweep needs lo <= hi and step > 0");
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 0.5)) + 1;
  std::vector<BoundPoint> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double x = std::min(hi, lo + step * static_cast<double>(i));
    out.push_back({ x, bound_value(theorem, x) });
  }
  return out;
}

// -- instances ------------------------------------------------------------------------

LinearDemandInstance LinearDemandInstance::make(double d0,
                                                double lambda,
                                                double c,
                                                std::function<double(double)> confounding,
                                                double eta,
                                                ConfoundingShape shape)
{
  if (!(d0 > 0.0) || !std::isfinite(d0))
    throw std::invalid_argument("d0 must be positive");
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("lambda must be positive");
  if (!std::isfinite(c))
    throw std::invalid_argument("cost must be finite");
  if (!(eta >= 0.0) || !std::isfinite(eta))
    throw std::invalid_argument("eta must be non-negative");
  if (!confounding)
    confounding = [](double) { return 0.0; };
  return { d0, lambda, c, std::move(confounding), eta, shape };
}

double thm2_worst_case_price(double d0, double lambda, double c, double eta)
{
  const double s = std::sqrt(d0) + std::sqrt(eta);
  return c + s * s / (2.0 * lambda);
}

double thm2_worst_case_reward(double d0, double lambda, double eta)
{
  return (d0 * d0 - 4.0 * d0 * eta - eta * eta - 4.0 * eta * std::sqrt(d0 * eta)) /
         (4.0 * lambda);
}

LinearDemandInstance worst_case_instance_thm2(double d0,
                                              double lambda,
                                              double c,
                                              double eta,
                                              std::optional<double> step)
{
  if (!(eta > 0.0) || !(eta <= d0))
    throw std::invalid_argument("worst-case instance needs 0 < eta <= d0");
  const double at = step ? *step : thm2_worst_case_price(d0, lambda, c, eta);
  return LinearDemandInstance::make(
    d0, lambda, c, [at, eta](double p) { return p >= at ? eta : -eta; }, eta);
}

LinearDemandInstance linear_confounding_instance(double d0,
                                                 double lambda,
                                                 double c,
                                                 double zeta,
                                                 double mu)
{
  if (!(zeta <= 0.0))
    throw std::invalid_argument("zeta must be non-positive");
  const double hi = c + d0 / lambda;
  const double eta = -zeta * std::max(std::abs(c - mu), std::abs(hi - mu));
  return LinearDemandInstance::make(
    d0, lambda, c, [zeta, mu](double p) { return zeta * (p - mu); }, eta,
    ConfoundingShape::nonincreasing);
}

double linear_confounding_price(double d0, double lambda, double c, double zeta, double mu)
{
  return (2.0 * lambda * c + d0 - zeta * (c + mu)) / (2.0 * lambda - 2.0 * zeta);
}

double empirical_ratio(const LinearDemandInstance& instance,
                       const DecisionSpace& space,
                       bool refine)
{
  const double best = instance.optimal_reward();
  if (best == 0.0)
    throw DataError("optimal reward is zero; the ratio is undefined");
  const auto opt = optimize_scalar_curve(
    [&](double z) { return instance.predictive_reward(z); }, space, refine);
  return instance.reward(opt.z) / best;
}

// -- verification sweep ---------------------------------------------------------------

namespace {

struct Piecewise
{
  std::vector<double> breaks;  // ascending; piece p covers [breaks[p-1], breaks[p])
  std::vector<double> values;  // breaks.size() + 1 values

  double operator()(double z) const
  {
    const auto p = std::upper_bound(breaks.begin(), breaks.end(), z) - breaks.begin();
    return values[static_cast<std::size_t>(p)];
  }
};

struct RandomInstance
{
  double d0, lambda, c, gamma;
  DecisionSpace space;
};

// the grid holds z* exactly at a quarter of [c, c + 2 d0 / lambda]
RandomInstance random_instance(Rng& rng, double gamma_hi)
{
  const double d0 = 0.5 + 4.5 * rng.uniform();
  const double lambda = 0.2 + 4.8 * rng.uniform();
  const double c = 3.0 * rng.uniform();
  const double gamma = gamma_hi * rng.uniform();
  return { d0, lambda, c, gamma,
           DecisionSpace::interval(c, c + 2.0 * d0 / lambda, 4 * 400 + 1) };
}

Piecewise random_steps(Rng& rng, double lo, double hi, double eta, bool monotone)
{
  Piecewise f;
  const auto pieces = 1 + rng.index(8);
  for (std::uint64_t p = 1; p < pieces; ++p)
    f.breaks.push_back(lo + (hi - lo) * rng.uniform());
  std::sort(f.breaks.begin(), f.breaks.end());
  for (std::uint64_t p = 0; p < pieces; ++p) {
    // half of the pieces sit on the extremes, where worst cases live
    const double v = rng.uniform() < 0.5 ? (rng.uniform() < 0.5 ? -eta : eta)
                                         : eta * (2.0 * rng.uniform() - 1.0);
    f.values.push_back(v);
  }
  if (monotone)
    std::sort(f.values.begin(), f.values.end(), std::greater<>());
  return f;
}

} // namespace

BoundVerification verify_bounds(std::uint64_t seed, std::size_t instances, std::size_t threads)
{
  BoundVerification out;
  out.instances = instances;
  constexpr double tol = 1e-9;

  for (int g = 1; g <= 16; ++g) {
    const double gamma = g / 100.0;
    const double d0 = 1.0, lambda = 1.0, c = 0.0, eta = gamma * d0;
    const double closed = thm2_worst_case_reward(d0, lambda, eta) /
                          (d0 * d0 / (4.0 * lambda));
    const double p = thm2_worst_case_price(d0, lambda, c, eta);
    const double direct = (p - c) * (d0 - lambda * (p - c)) / (d0 * d0 / (4.0 * lambda));
    out.tightness_max_error =
      std::max({ out.tightness_max_error, std::abs(closed - bound_thm2(gamma)),
                 std::abs(direct - bound_thm2(gamma)) });

    // on a grid, put the step on the last node before the tie point so the
    // grid optimizer lands on it
    const auto space = DecisionSpace::interval(c, c + 2.0 * d0 / lambda, 20001);
    const auto& grid = space.grid();
    const auto node = std::upper_bound(grid.begin(), grid.end(), p) - grid.begin() - 1;
    const auto inst = worst_case_instance_thm2(d0, lambda, c, eta,
                                               grid[static_cast<std::size_t>(node)]);
    out.grid_tightness_max_error = std::max(
      out.grid_tightness_max_error, std::abs(empirical_ratio(inst, space) - bound_thm2(gamma)));
  }

  std::vector<double> s2(instances), s3(instances), s4(instances);
  parallel_for(instances, threads, [&](std::size_t i) {
    Rng rng(derive_seed(seed, { 2, i }));
    {
      auto r = random_instance(rng, 0.17);
      const double eta = r.gamma * r.d0;
      const double lo = r.space.lo(), hi = r.space.hi();
      std::function<double(double)> e;
      if (rng.uniform() < 0.25) {
        // the worst-case shape with its step moved around
        const double step = lo + (hi - lo) * rng.uniform();
        e = [step, eta](double p) { return p >= step ? eta : -eta; };
      } else {
        e = random_steps(rng, lo, hi, eta, false);
      }
      const auto inst = LinearDemandInstance::make(r.d0, r.lambda, r.c, e, eta);
      s2[i] = empirical_ratio(inst, r.space) - bound_thm2(r.gamma);
    }
    {
      auto r = random_instance(rng, 1.0);
      const double eta = r.gamma * r.d0;
      const auto e = random_steps(rng, r.space.lo(), r.space.hi(), eta, true);
      const auto inst = LinearDemandInstance::make(r.d0, r.lambda, r.c, e, eta,
                                                   ConfoundingShape::nonincreasing);
      s4[i] = empirical_ratio(inst, r.space) - bound_thm4(r.gamma);
    }
    {
      const double d0 = 0.5 + 4.5 * rng.uniform();
      const double lambda = 0.2 + 4.8 * rng.uniform();
      const double c = 3.0 * rng.uniform();
      const double mu = c + (d0 / lambda) * rng.uniform();
      const double zeta = -100.0 * rng.uniform();
      const double mean_demand = d0 - lambda * (mu - c);
      const double p = linear_confounding_price(d0, lambda, c, zeta, mu);
      const double ratio = (p - c) * (d0 - lambda * (p - c)) / (d0 * d0 / (4.0 * lambda));
      s3[i] = ratio - bound_thm3(std::clamp(mean_demand / d0, 0.0, 1.0));
    }
  });

  auto min_of = [](const std::vector<double>& v) {
    return v.empty() ? 0.0 : *std::min_element(v.begin(), v.end());
  };
  out.thm2_min_slack = min_of(s2);
  out.thm3_min_slack = min_of(s3);
  out.thm4_min_slack = min_of(s4);
  for (const auto* v : { &s2, &s3, &s4 })
    out.violations += static_cast<std::size_t>(
      std::count_if(v->begin(), v->end(), [](double s) { return s < -tol; }));
  return out;
}

} // namespace obsopt
