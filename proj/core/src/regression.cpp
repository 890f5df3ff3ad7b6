#include "obsopt/regression.hpp"
#include "obsopt/core.hpp"
#include "obsopt/error.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace obsopt {

// -- Nadaraya-Watson ----------------------------------------------------------------

NWRegression::NWRegression(Eigen::MatrixXd points,
                           Eigen::VectorXd targets,
                           KernelSpec kernel,
                           double h,
                           NWOptions options)
  : points_(std::move(points))
  , targets_(std::move(targets))
  , kernel_(kernel)
  , h_(h)
{
  if (targets_.size() < 1 || points_.rows() != targets_.size())
    throw std::invalid_argument("NW regression needs n >= 1 matching points");
  if (static_cast<std::size_t>(points_.cols()) != kernel_.dim)
    throw std::invalid_argument("NW kernel dimension does not match the points");
  if (!(h_ > 0.0) || !std::isfinite(h_))
    throw std::invalid_argument("NW bandwidth must be positive");
  if (!points_.allFinite() || !targets_.allFinite())
    throw std::invalid_argument("NW regression data must be finite");
  kernel_.validate();

  const auto d = points_.cols();
  center_.assign(static_cast<std::size_t>(d), 0.0);
  scale_.assign(static_cast<std::size_t>(d), 1.0);
  if (options.standardize_covariates && points_.rows() > 1) {
    for (Eigen::Index c = 1; c < d; ++c) {
      const double mean = points_.col(c).mean();
      const double var = (points_.col(c).array() - mean).square().sum() /
                         static_cast<double>(points_.rows() - 1);
      const double sd = std::sqrt(var);
      center_[static_cast<std::size_t>(c)] = mean;
      scale_[static_cast<std::size_t>(c)] = sd > 0.0 ? sd : 1.0;
      points_.col(c) = (points_.col(c).array() - mean) / scale_[static_cast<std::size_t>(c)];
    }
  }
}

double NWRegression::predict(std::span<const double> query) const
{
  const auto d = static_cast<std::size_t>(points_.cols());
  if (query.size() != d)
    throw std::invalid_argument("NW query has the wrong dimension");
  std::vector<double> q(d), u(d);
  for (std::size_t c = 0; c < d; ++c) {
    if (!std::isfinite(query[c]))
      throw std::invalid_argument("NW query must be finite");
    q[c] = (query[c] - center_[c]) / scale_[c];
  }

  const auto n = points_.rows();
  double num = 0.0, den = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < d; ++c)
      u[c] = (q[c] - points_(i, static_cast<Eigen::Index>(c))) / h_;
    const double w = kernel_eval(kernel_, u);
    num += w * targets_(i);
    den += w;
  }
  if (std::abs(den) >= std::numeric_limits<double>::min())
    return num / den;

  if (has_gaussian_envelope(kernel_.family)) {
    // every weight underflowed: the ratio is invariant to a common factor, so
    // recompute with the largest exponential pulled out
    std::vector<double> expo(static_cast<std::size_t>(n));
    double top = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double v = (q[c] - points_(i, static_cast<Eigen::Index>(c))) / h_;
        s += v * v;
      }
      expo[static_cast<std::size_t>(i)] = -0.5 * s;
      top = std::max(top, -0.5 * s);
    }
    num = 0.0;
    den = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double w = std::exp(expo[static_cast<std::size_t>(i)] - top);
      if (w == 0.0)
        continue;
      for (std::size_t c = 0; c < d; ++c)
        w *= kernel_polynomial(kernel_.family,
                               (q[c] - points_(i, static_cast<Eigen::Index>(c))) / h_);
      num += w * targets_(i);
      den += w;
    }
    if (den != 0.0)
      return num / den;
  } else if (den != 0.0) {
    return num / den;
  }

  std::string where = "(";
  for (std::size_t c = 0; c < d; ++c)
    where += (c ? ", " : "") + format_number(query[c]);
  throw EmptyNeighborhoodError("empty neighborhood: all kernel weights vanish at query " +
                                 where + ")",
                               0);
}

double NWRegression::predict(double z) const
{
  return predict(std::span<const double>(&z, 1));
}

double nw_predict(const NWRegression& model, std::span<const double> query)
{
  return model.predict(query);
}

// -- least squares --------------------------------------------------------------------

double LinearFit::predict(std::span<const double> regressors) const
{
  if (regressors.size() + 1 != static_cast<std::size_t>(coefficients.size()))
    throw std::invalid_argument("linear model expects " +
                                std::to_string(coefficients.size() - 1) +
                                " regressors");
  double out = coefficients(0);
  for (std::size_t j = 0; j < regressors.size(); ++j)
    out += coefficients(static_cast<Eigen::Index>(j + 1)) * regressors[j];
  return out;
}

LinearFit ols_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& y)
{
  const auto n = design.rows();
  const auto p = design.cols();
  if (p < 1 || y.size() != n)
    throw std::invalid_argument("OLS design and response sizes differ");
  if (n < p)
    throw std::invalid_argument("OLS needs at least as many rows as columns");
  if (!design.allFinite() || !y.allFinite())
    throw std::invalid_argument("OLS inputs must be finite");

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(design);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < p; ++j) {
    const double scale = std::max(1.0, design.col(j).norm());
    if (std::abs(r(j, j)) <= 1e-10 * scale)
      throw RankDeficiencyError("design is rank deficient: column " +
                                  std::to_string(j) +
                                  " is collinear with earlier columns",
                                static_cast<std::size_t>(j));
  }

  LinearFit fit;
  fit.coefficients = qr.solve(y);
  const Eigen::VectorXd resid = y - design * fit.coefficients;
  fit.residual_variance =
    n > p ? resid.squaredNorm() / static_cast<double>(n - p) : 0.0;
  return fit;
}

// -- logistic -------------------------------------------------------------------------

double logistic(double eta)
{
  if (eta >= 0.0)
    return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

double LogisticFit::probability(std::span<const double> regressors) const
{
  if (regressors.size() + 1 != static_cast<std::size_t>(coefficients.size()))
    throw std::invalid_argument("logistic model expects " +
                                std::to_string(coefficients.size() - 1) +
                                " regressors");
  double eta = coefficients(0);
  for (std::size_t j = 0; j < regressors.size(); ++j)
    eta += coefficients(static_cast<Eigen::Index>(j + 1)) * regressors[j];
  return logistic(eta);
}

namespace {

double softplus(double eta)
{
  return std::max(eta, 0.0) + std::log1p(std::exp(-std::abs(eta)));
}

double log_likelihood(const Eigen::MatrixXd& design,
                      const Eigen::VectorXd& y,
                      const Eigen::VectorXd& beta)
{
  const Eigen::VectorXd eta = design * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    ll += y(i) * eta(i) - softplus(eta(i));
  return ll;
}

} // namespace

LogisticFit logistic_fit(const Eigen::MatrixXd& design,
                         const Eigen::VectorXd& y,
                         int max_iter,
                         double tol)
{
  const auto n = design.rows();
  const auto p = design.cols();
  if (p < 1 || y.size() != n || n < 1)
    throw std::invalid_argument("logistic design and response sizes differ");
  if (!design.allFinite())
    throw std::invalid_argument("logistic design must be finite");
  Eigen::Index ones = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (y(i) != 0.0 && y(i) != 1.0)
      throw DataError("logistic regression needs binary outcomes, found " +
                      format_number(y(i)) + " at row " + std::to_string(i));
    ones += y(i) == 1.0;
  }
  if (ones == 0 || ones == n)
    throw DataError("logistic regression needs both outcome classes (all " +
                    std::string(ones == 0 ? "0" : "1") + ")");

  LogisticFit fit;
  fit.coefficients = Eigen::VectorXd::Zero(p);
  double ll = log_likelihood(design, y, fit.coefficients);

  for (int iter = 1; iter <= max_iter; ++iter) {
    fit.iterations = iter;
    const Eigen::VectorXd eta = design * fit.coefficients;
    Eigen::VectorXd prob(n), weight(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      prob(i) = logistic(eta(i));
      weight(i) = prob(i) * (1.0 - prob(i));
    }
    const Eigen::VectorXd score = design.transpose() * (y - prob);
    const Eigen::MatrixXd info =
      design.transpose() * weight.asDiagonal() * design;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
      throw SeparationError("logistic information matrix is singular; the "
                            "classes are (quasi-)separated");
    const Eigen::VectorXd step = ldlt.solve(score);
    if (!step.allFinite())
      throw SeparationError("logistic Newton step diverged; the classes are "
                            "separated");

    // step halving until the likelihood does not decrease
    double t = 1.0;
    Eigen::VectorXd candidate = fit.coefficients + step;
    double ll_new = log_likelihood(design, y, candidate);
    while (ll_new < ll - 1e-12 * std::abs(ll) && t > 1e-10) {
      t *= 0.5;
      candidate = fit.coefficients + t * step;
      ll_new = log_likelihood(design, y, candidate);
    }
    const double change = (t * step).cwiseAbs().maxCoeff();
    fit.coefficients = candidate;
    ll = ll_new;

    if (fit.coefficients.norm() > 1e6)
      throw SeparationError("logistic coefficients diverge (norm > 1e6); the "
                            "classes are separated");
    if (change < tol) {
      fit.converged = true;
      break;
    }
    const Eigen::VectorXd fitted = design * fit.coefficients;
    bool perfect = true;
    for (Eigen::Index i = 0; i < n && perfect; ++i)
      perfect = std::abs(y(i) - logistic(fitted(i))) < 1e-10;
    if (perfect)
      throw SeparationError("logistic fit reproduces every outcome exactly; "
                            "the classes are separated");
  }
  return fit;
}

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& columns)
{
  Eigen::MatrixXd out(columns.rows(), columns.cols() + 1);
  out.col(0).setOnes();
  out.rightCols(columns.cols()) = columns;
  return out;
}

// -- serialization ----------------------------------------------------------------------

namespace {

std::vector<double> to_vector(const Eigen::VectorXd& v)
{
  return { v.data(), v.data() + v.size() };
}

Eigen::VectorXd from_vector(const std::vector<double>& v)
{
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void check_version(const nlohmann::json& j, const char* family)
{
  if (j.at("version").get<int>() != 1 || j.at("family").get<std::string>() != family)
    throw DataError(std::string("unsupported model document (expected ") + family +
                    " v1)");
}

} // namespace

void to_json(nlohmann::json& j, const LinearFit& fit)
{
  j = nlohmann::json{ { "version", 1 },
                      { "family", "ols" },
                      { "coefficients", to_vector(fit.coefficients) },
                      { "residual_variance", fit.residual_variance } };
}

void from_json(const nlohmann::json& j, LinearFit& fit)
{
  check_version(j, "ols");
  fit.coefficients = from_vector(j.at("coefficients").get<std::vector<double>>());
  fit.residual_variance = j.at("residual_variance").get<double>();
}

void to_json(nlohmann::json& j, const LogisticFit& fit)
{
  j = nlohmann::json{ { "version", 1 },
                      { "family", "logistic" },
                      { "coefficients", to_vector(fit.coefficients) },
                      { "converged", fit.converged },
                      { "iterations", fit.iterations } };
}

void from_json(const nlohmann::json& j, LogisticFit& fit)
{
  check_version(j, "logistic");
  fit.coefficients = from_vector(j.at("coefficients").get<std::vector<double>>());
  fit.converged = j.at("converged").get<bool>();
  fit.iterations = j.at("iterations").get<int>();
}

} // namespace obsopt
