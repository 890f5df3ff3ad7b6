#pragma once

#include "obsopt/core.hpp"
#include "obsopt/kernels.hpp"
#include "obsopt/regression.hpp"

#include <nlohmann/json_fwd.hpp>

#include <memory>
#include <optional>
#include <string>

namespace obsopt {

enum class PredictiveVariant
{
  nonparam_nw,       //!< kernel regression of r(Z)Y on Z
  param_ols_linear,  //!< OLS of Y on Z (optionally also Z^2)
  param_logistic     //!< logistic regression of binary Y on Z
};

std::string to_string(PredictiveVariant variant);

//! Estimate of the predictive objective r(z) E[Y | Z = z] built from the
//! decisions and outcomes alone (covariates are ignored).
class PredictiveCurve
{
public:
  double operator()(double z) const;

  PredictiveVariant variant() const { return variant_; }
  const RewardSpec& reward() const { return reward_; }
  bool quadratic() const { return quadratic_; }

  //! Fitted components; exactly one is populated, matching variant().
  const NWRegression* nw() const { return nw_.get(); }
  const std::optional<LinearFit>& linear() const { return linear_; }
  const std::optional<LogisticFit>& logistic() const { return logistic_; }

  //! Versioned description of the fitted model.
  nlohmann::json describe() const;

private:
  friend PredictiveCurve fit_predictive_nonparam(const ObservationalDataset&,
                                                 const KernelSpec&,
                                                 const RewardSpec&);
  friend struct PredictiveFitAccess;

  PredictiveCurve(PredictiveVariant variant, RewardSpec reward)
    : variant_(variant)
    , reward_(reward)
  {}

  PredictiveVariant variant_;
  RewardSpec reward_;
  bool quadratic_ = false;
  std::shared_ptr<const NWRegression> nw_;
  std::optional<LinearFit> linear_;
  std::optional<LogisticFit> logistic_;
};

//! Kernel regression of r(Z_i) Y_i on Z_i. The kernel must have dim 1; its
//! bandwidth rule is applied at the sample size.
PredictiveCurve fit_predictive_nonparam(const ObservationalDataset& data,
                                        const KernelSpec& kernel,
                                        const RewardSpec& reward);

enum class PredictiveFamily
{
  ols_linear,
  logistic
};

struct PredictiveParamOptions
{
  //! Add a Z^2 regressor. Off by default (a straight line in Z).
  bool quadratic = false;
  int max_iter = 100;
  double tol = 1e-8;
};

//! Parametric fit of Y on Z; the curve is r(z) times the fitted mean.
//! Throws std::invalid_argument when n < 3.
PredictiveCurve fit_predictive_param(const ObservationalDataset& data,
                                     PredictiveFamily family,
                                     const RewardSpec& reward,
                                     PredictiveParamOptions options = {});

//! Grid maximizer of the predictive curve (ties to the smallest z).
Optimum predictive_decision(const PredictiveCurve& curve,
                            const DecisionSpace& space,
                            bool refine = false);

} // namespace obsopt
