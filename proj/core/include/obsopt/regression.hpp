#pragma once

#include "obsopt/kernels.hpp"

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include <cstddef>
#include <span>
#include <vector>

namespace obsopt {

struct NWOptions
{
  //! Rescale columns 1..d-1 to mean 0 / variance 1 before evaluating the
  //! kernel. Column 0 is the decision coordinate and is left in its units.
  bool standardize_covariates = true;
};

//! Nadaraya-Watson regression with a product kernel at one common bandwidth.
class NWRegression
{
public:
  NWRegression(Eigen::MatrixXd points,
               Eigen::VectorXd targets,
               KernelSpec kernel,
               double h,
               NWOptions options = {});

  //! Kernel-weighted mean of the targets at `query` (length d).
  //! Throws EmptyNeighborhoodError if every weight vanishes.
  double predict(std::span<const double> query) const;

  //! Shortcut for d == 1.
  double predict(double z) const;

  std::size_t size() const { return static_cast<std::size_t>(targets_.size()); }
  std::size_t dim() const { return static_cast<std::size_t>(points_.cols()); }
  const KernelSpec& kernel() const { return kernel_; }
  double h() const { return h_; }

private:
  Eigen::MatrixXd points_;  // row-major copy would not help; rows are small
  Eigen::VectorXd targets_;
  KernelSpec kernel_;
  double h_;
  std::vector<double> center_;
  std::vector<double> scale_;
};

double nw_predict(const NWRegression& model, std::span<const double> query);

struct LinearFit
{
  Eigen::VectorXd coefficients;  //!< intercept first
  double residual_variance = 0.0;

  double predict(std::span<const double> regressors) const;
};

//! Least squares on a design whose first column is the intercept.
//! Throws RankDeficiencyError naming the first collinear column.
LinearFit ols_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& y);

struct LogisticFit
{
  Eigen::VectorXd coefficients;  //!< intercept first
  bool converged = false;
  int iterations = 0;

  double probability(std::span<const double> regressors) const;
};

//! Maximum-likelihood logistic regression by damped Newton-Raphson.
//!
//! Converged when the largest coefficient change is below tol. Throws
//! DataError for one-class outcomes and SeparationError when the likelihood
//! has no finite maximizer (coefficient norm above 1e6 or a perfect fit).
LogisticFit logistic_fit(const Eigen::MatrixXd& design,
                         const Eigen::VectorXd& y,
                         int max_iter = 100,
                         double tol = 1e-8);

//! Numerically stable logistic function.
double logistic(double eta);

//! Design matrix [1, columns...].
Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& columns);

void to_json(nlohmann::json& j, const LinearFit& fit);
void from_json(const nlohmann::json& j, LinearFit& fit);
void to_json(nlohmann::json& j, const LogisticFit& fit);
void from_json(const nlohmann::json& j, LogisticFit& fit);

} // namespace obsopt
