#include "obsopt/predictive.hpp"

#include <nlohmann/json.hpp>

#include <stdexcept>

namespace obsopt {

struct PredictiveFitAccess
{
  static PredictiveCurve make(PredictiveVariant variant, const RewardSpec& reward)
  {
    return PredictiveCurve(variant, reward);
  }
  static PredictiveCurve& set_linear(PredictiveCurve& c, LinearFit fit, bool quadratic)
  {
    c.linear_ = std::move(fit);
    c.quadratic_ = quadratic;
    return c;
  }
  static PredictiveCurve& set_logistic(PredictiveCurve& c, LogisticFit fit, bool quadratic)
  {
    c.logistic_ = std::move(fit);
    c.quadratic_ = quadratic;
    return c;
  }
};

std::string to_string(PredictiveVariant variant)
{
  switch (variant) {
    case PredictiveVariant::nonparam_nw:
      return "nw";
    case PredictiveVariant::param_ols_linear:
      return "ols";
    case PredictiveVariant::param_logistic:
      return "logit";
  }
  return "?";
}

double PredictiveCurve::operator()(double z) const
{
  const double x[2] = { z, z * z };
  const std::span<const double> regs(x, quadratic_ ? 2 : 1);
  switch (variant_) {
    case PredictiveVariant::nonparam_nw:
      return nw_->predict(z);
    case PredictiveVariant::param_ols_linear:
      return reward_(z) * linear_->predict(regs);
    case PredictiveVariant::param_logistic:
      return reward_(z) * logistic_->probability(regs);
  }
  return 0.0;
}

nlohmann::json PredictiveCurve::describe() const
{
  nlohmann::json j{ { "version", 1 },
                    { "variant", to_string(variant_) },
                    { "reward", reward_.str() } };
  if (nw_) {
    j["kernel"] = to_string(nw_->kernel().family);
    j["bandwidth"] = nw_->h();
    j["n"] = nw_->size();
  }
  if (linear_) {
    j["model"] = *linear_;
    j["quadratic"] = quadratic_;
  }
  if (logistic_) {
    j["model"] = *logistic_;
    j["quadratic"] = quadratic_;
  }
  return j;
}

PredictiveCurve fit_predictive_nonparam(const ObservationalDataset& data,
                                        const KernelSpec& kernel,
                                        const RewardSpec& reward)
{
  if (kernel.dim != 1)
    throw std::invalid_argument("predictive kernel regression needs a 1-d kernel");
  const std::size_t n = data.size();
  const double h = bandwidth(kernel, n);
  Eigen::VectorXd targets(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < targets.size(); ++i)
    targets(i) = reward(data.z()(i)) * data.y()(i);
  PredictiveCurve curve(PredictiveVariant::nonparam_nw, reward);
  curve.nw_ = std::make_shared<const NWRegression>(
    Eigen::MatrixXd(data.z()), std::move(targets), kernel, h, NWOptions{ false });
  return curve;
}

PredictiveCurve fit_predictive_param(const ObservationalDataset& data,
                                     PredictiveFamily family,
                                     const RewardSpec& reward,
                                     PredictiveParamOptions options)
{
  const auto n = static_cast<Eigen::Index>(data.size());
  if (n < 3)
    throw std::invalid_argument("parametric predictive fit needs n >= 3");
  Eigen::MatrixXd regs(n, options.quadratic ? 2 : 1);
  regs.col(0) = data.z();
  if (options.quadratic)
    regs.col(1) = data.z().array().square().matrix();
  const Eigen::MatrixXd design = with_intercept(regs);

  if (family == PredictiveFamily::ols_linear) {
    auto curve = PredictiveFitAccess::make(PredictiveVariant::param_ols_linear, reward);
    return PredictiveFitAccess::set_linear(curve, ols_fit(design, data.y()),
                                           options.quadratic);
  }
  auto curve = PredictiveFitAccess::make(PredictiveVariant::param_logistic, reward);
  return PredictiveFitAccess::set_logistic(
    curve, logistic_fit(design, data.y(), options.max_iter, options.tol),
    options.quadratic);
}

Optimum predictive_decision(const PredictiveCurve& curve,
                            const DecisionSpace& space,
                            bool refine)
{
  return optimize_scalar_curve([&](double z) { return curve(z); }, space, refine);
}

} // namespace obsopt
