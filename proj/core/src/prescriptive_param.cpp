#include "obsopt/prescriptive_param.hpp"
#include "obsopt/error.hpp"
#include "obsopt/parallel.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace obsopt {

TreatmentFamily parse_treatment_family(const std::string& name)
{
  if (name == "ols" || name == "gaussian")
    return TreatmentFamily::gaussian_identity;
  if (name == "lognormal")
    return TreatmentFamily::lognormal;
  throw std::invalid_argument("unknown treatment model '" + name + "' (ols|lognormal)");
}

std::string to_string(TreatmentFamily family)
{
  return family == TreatmentFamily::lognormal ? "lognormal" : "ols";
}

OutcomeFamily parse_outcome_family(const std::string& name)
{
  if (name == "linear")
    return OutcomeFamily::linear;
  if (name == "logit" || name == "logistic")
    return OutcomeFamily::logistic;
  throw std::invalid_argument("unknown outcome model '" + name + "' (linear|logit)");
}

GpsFeature parse_gps_feature(const std::string& name)
{
  if (name == "quad")
    return GpsFeature::quad;
  if (name == "log")
    return GpsFeature::log;
  throw std::invalid_argument("unknown GPS feature '" + name + "' (quad|log)");
}

std::string to_string(OutcomeFamily family)
{
  return family == OutcomeFamily::logistic ? "logit" : "linear";
}

std::string to_string(GpsFeature feature)
{
  return feature == GpsFeature::quad ? "quad" : "log";
}

// -- treatment ----------------------------------------------------------------------

double TreatmentModel::density(double z, std::span<const double> x) const
{
  const double mean = fit.predict(x);
  if (family == TreatmentFamily::gaussian_identity) {
    const double u = (z - mean) / tau;
    return std::exp(-0.5 * u * u) / (tau * std::sqrt(2.0 * std::numbers::pi));
  }
  if (!(z > 0.0))
    return 0.0;
  const double u = (std::log(z) - mean) / tau;
  return std::exp(-0.5 * u * u) / (tau * z * std::sqrt(2.0 * std::numbers::pi));
}

TreatmentModel fit_treatment_model(const ObservationalDataset& data,
                                   TreatmentFamily family)
{
  const std::size_t k = data.covariates();
  const std::size_t n = data.size();
  if (k == 0)
    throw std::invalid_argument("treatment model needs at least one covariate");
  if (n <= k + 1)
    throw std::invalid_argument("treatment model needs n > k + 1 records");

  Eigen::VectorXd response = data.z();
  if (family == TreatmentFamily::lognormal) {
    for (Eigen::Index i = 0; i < response.size(); ++i) {
      if (!(response(i) > 0.0))
        throw DataError("lognormal treatment model needs positive decisions; row " +
                        std::to_string(i) + " has z = " + format_number(response(i)));
      response(i) = std::log(response(i));
    }
  }
  TreatmentModel model;
  model.family = family;
  model.fit = ols_fit(with_intercept(data.x()), response);
  model.tau = std::sqrt(model.fit.residual_variance);
  if (!(model.tau > 0.0))
    throw DataError("treatment model has zero residual variance; the decision is a "
                    "deterministic function of the covariates");
  return model;
}

std::vector<double> impute_gps(const TreatmentModel& model,
                               const ObservationalDataset& data,
                               std::size_t* floored)
{
  const std::size_t k = data.covariates();
  if (k != model.covariates())
    throw std::invalid_argument("treatment model covariate count does not match data");
  std::vector<double> q(data.size());
  std::vector<double> x(k);
  std::size_t low = 0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    for (std::size_t c = 0; c < k; ++c)
      x[c] = data.x()(row, static_cast<Eigen::Index>(c));
    q[i] = model.density(data.z()(row), x);
    if (!(q[i] >= gps_floor)) {
      q[i] = gps_floor;
      ++low;
    }
  }
  if (floored)
    *floored = low;
  return q;
}

// -- outcome ------------------------------------------------------------------------

namespace {

void features(GpsFeature feature, double z, double q, double* out)
{
  out[0] = z;
  if (feature == GpsFeature::quad) {
    out[1] = q;
    out[2] = q * q;
  } else {
    if (!(q > 0.0))
      throw std::invalid_argument("log GPS feature needs q > 0, got " + format_number(q));
    out[1] = std::log(q);
  }
}

std::size_t feature_count(GpsFeature feature)
{
  return feature == GpsFeature::quad ? 3 : 2;
}

} // namespace

double OutcomeModel::predict(double z, double q) const
{
  double regs[3];
  features(feature, z, q, regs);
  const std::span<const double> view(regs, feature_count(feature));
  return family == OutcomeFamily::linear ? linear->predict(view)
                                         : logistic->probability(view);
}

const Eigen::VectorXd& OutcomeModel::coefficients() const
{
  return family == OutcomeFamily::linear ? linear->coefficients
                                         : logistic->coefficients;
}

OutcomeModel fit_outcome_model(const ObservationalDataset& data,
                               std::span<const double> gps,
                               OutcomeFamily family,
                               GpsFeature feature,
                               int max_iter,
                               double tol)
{
  const std::size_t n = data.size();
  if (gps.size() != n)
    throw std::invalid_argument("GPS vector length must equal the number of records");
  const std::size_t p = feature_count(feature);
  Eigen::MatrixXd regs(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  double row[3];
  for (std::size_t i = 0; i < n; ++i) {
    if (!(gps[i] > 0.0))
      throw std::invalid_argument("GPS values must be positive (row " +
                                  std::to_string(i) + ")");
    features(feature, data.z()(static_cast<Eigen::Index>(i)), gps[i], row);
    for (std::size_t c = 0; c < p; ++c)
      regs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = row[c];
  }
  const Eigen::MatrixXd design = with_intercept(regs);

  OutcomeModel model;
  model.family = family;
  model.feature = feature;
  if (family == OutcomeFamily::linear)
    model.linear = ols_fit(design, data.y());
  else
    model.logistic = logistic_fit(design, data.y(), max_iter, tol);
  return model;
}

// -- prescription -------------------------------------------------------------------

GpsPrescription gps_prescribe(const TreatmentModel& treatment,
                              const OutcomeModel& outcome,
                              const ObservationalDataset& data,
                              const RewardSpec& reward,
                              const DecisionSpace& space,
                              std::size_t threads)
{
  const std::size_t k = data.covariates();
  if (k != treatment.covariates())
    throw std::invalid_argument("treatment model covariate count does not match data");
  const std::size_t n = data.size();
  const auto& grid = space.grid();

  GpsPrescription out;
  out.curve.assign(grid.size(), 0.0);
  std::vector<std::size_t> low(grid.size(), 0);
  parallel_for(grid.size(), threads, [&](std::size_t node) {
    const double z = grid[node];
    std::vector<double> x(k);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      for (std::size_t c = 0; c < k; ++c)
        x[c] = data.x()(row, static_cast<Eigen::Index>(c));
      double q = treatment.density(z, x);
      if (!(q >= gps_floor)) {
        q = gps_floor;
        ++low[node];
      }
      sum += outcome.predict(z, q);
    }
    out.curve[node] = reward(z) * (sum / static_cast<double>(n));
  });
  for (auto c : low)
    out.floored += c;
  out.optimum = optimize_on_grid(out.curve, space);
  return out;
}

// -- serialization ------------------------------------------------------------------

void to_json(nlohmann::json& j, const TreatmentModel& model)
{
  j = nlohmann::json{ { "version", 1 },
                      { "family", to_string(model.family) },
                      { "coefficients", model.fit.coefficients.size() > 0
                                          ? std::vector<double>(model.fit.coefficients.data(),
                                                                model.fit.coefficients.data() +
                                                                  model.fit.coefficients.size())
                                          : std::vector<double>{} },
                      { "tau", model.tau } };
}

void to_json(nlohmann::json& j, const OutcomeModel& model)
{
  const auto& beta = model.coefficients();
  j = nlohmann::json{ { "version", 1 },
                      { "family", to_string(model.family) },
                      { "gps_feature", to_string(model.feature) },
                      { "coefficients",
                        std::vector<double>(beta.data(), beta.data() + beta.size()) } };
  if (model.logistic) {
    j["converged"] = model.logistic->converged;
    j["iterations"] = model.logistic->iterations;
  }
}

} // namespace obsopt
