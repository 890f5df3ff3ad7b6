#pragma once

#include "obsopt/core.hpp"
#include "obsopt/regression.hpp"

#include <nlohmann/json_fwd.hpp>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace obsopt {

//! Densities below this value are replaced by it before use.
inline constexpr double gps_floor = 1e-300;

enum class TreatmentFamily
{
  gaussian_identity,  //!< Z | X ~ N(b0 + b'X, tau^2)
  lognormal           //!< ln Z | X ~ N(b0 + b'X, tau^2)
};

TreatmentFamily parse_treatment_family(const std::string& name);  // "ols" | "lognormal"
std::string to_string(TreatmentFamily family);

//! Fitted conditional law of the decision given the covariates.
struct TreatmentModel
{
  TreatmentFamily family = TreatmentFamily::gaussian_identity;
  LinearFit fit;      //!< regression of Z (or ln Z) on [1, X]
  double tau = 0.0;   //!< residual standard deviation

  std::size_t covariates() const
  {
    return static_cast<std::size_t>(fit.coefficients.size()) - 1;
  }

  //! Conditional density f(z | x); 0 for z <= 0 under the lognormal family.
  double density(double z, std::span<const double> x) const;
};

//! Maximum-likelihood fit (OLS with tau^2 = RSS / (n - k - 1)).
//! Throws std::invalid_argument if k == 0 or n <= k + 1, DataError when a
//! lognormal fit meets a non-positive decision, RankDeficiencyError when the
//! covariates are collinear with the intercept.
TreatmentModel fit_treatment_model(const ObservationalDataset& data,
                                   TreatmentFamily family);

//! Q_i = f(Z_i | X_i). Values below gps_floor are raised to it; the number of
//! such records is written to `floored` when given.
std::vector<double> impute_gps(const TreatmentModel& model,
                               const ObservationalDataset& data,
                               std::size_t* floored = nullptr);

enum class OutcomeFamily
{
  linear,
  logistic
};

enum class GpsFeature
{
  quad,  //!< regressors q and q^2
  log    //!< regressor ln q
};

OutcomeFamily parse_outcome_family(const std::string& name);  // "linear" | "logit"
GpsFeature parse_gps_feature(const std::string& name);        // "quad" | "log"
std::string to_string(OutcomeFamily family);
std::string to_string(GpsFeature feature);

//! Regression of Y on [1, z, features(q)].
struct OutcomeModel
{
  OutcomeFamily family = OutcomeFamily::linear;
  GpsFeature feature = GpsFeature::log;
  std::optional<LinearFit> linear;
  std::optional<LogisticFit> logistic;

  //! Fitted mean y(z, q). Throws std::invalid_argument for q <= 0 with the
  //! log feature.
  double predict(double z, double q) const;

  const Eigen::VectorXd& coefficients() const;
};

OutcomeModel fit_outcome_model(const ObservationalDataset& data,
                               std::span<const double> gps,
                               OutcomeFamily family,
                               GpsFeature feature,
                               int max_iter = 100,
                               double tol = 1e-8);

struct GpsPrescription
{
  Optimum optimum;
  std::vector<double> curve;  //!< r(z) (1/n) sum_i y(z, q_i(z)) on the grid
  std::size_t floored = 0;    //!< (record, node) pairs whose density was floored
};

//! Averages the outcome model over the covariate sample, with the propensity
//! re-imputed at each candidate decision, and maximizes r(z) times the
//! average on the grid.
GpsPrescription gps_prescribe(const TreatmentModel& treatment,
                              const OutcomeModel& outcome,
                              const ObservationalDataset& data,
                              const RewardSpec& reward,
                              const DecisionSpace& space,
                              std::size_t threads = 1);

void to_json(nlohmann::json& j, const TreatmentModel& model);
void to_json(nlohmann::json& j, const OutcomeModel& model);

} // namespace obsopt
