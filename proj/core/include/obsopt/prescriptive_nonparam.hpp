#pragma once

#include "obsopt/core.hpp"
#include "obsopt/kernels.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace obsopt {

struct PartialMeanOptions
{
  //! Rescale each covariate column to unit sample variance before the kernel
  //! is applied; the decision coordinate keeps its units.
  bool standardize_covariates = true;

  //! Explicit per-column scales (length k). When given they replace the
  //! sample standard deviations, whatever standardize_covariates says.
  std::vector<double> covariate_scale;

  //! When nonzero and n exceeds it, the outer average runs over a seeded
  //! subsample of this many rows (the inner regressions still use all rows).
  std::size_t row_cap = 0;
  std::uint64_t subsample_seed = 0;

  //! Worker threads for grid evaluation (0 = hardware concurrency).
  std::size_t threads = 1;
};

//! Partial-mean estimate of the causal objective,
//!
//!   R(z) ~ (1/m) sum_i [ sum_j K((z-Z_j)/h, (X_i-X_j)/h) r(Z_j) Y_j
//!                        / sum_j K((z-Z_j)/h, (X_i-X_j)/h) ],
//!
//! i.e. the joint Nadaraya-Watson regression of r(Z)Y on (Z, X) queried at
//! (z, X_i) and averaged over the rows i of the outer sample.
//!
//! Rows may carry integer multiplicities (a bootstrap resample stores each
//! distinct row once). The covariate kernel factors are cached at
//! construction in a band: outer rows are ordered by the first covariate and
//! each column keeps only the run of rows where that factor can be nonzero.
//! The curve is evaluated on every node of the decision space.
class PartialMeanCurve
{
public:
  //! Throws std::invalid_argument if the dataset has no covariates or the
  //! kernel dimension is not 1 + k, and EmptyNeighborhoodError (naming the
  //! row) or DataError (naming the node) if a grid value cannot be formed.
  PartialMeanCurve(const ObservationalDataset& data,
                   KernelSpec kernel,
                   double h,
                   RewardSpec reward,
                   DecisionSpace space,
                   PartialMeanOptions options = {});

  //! Curve of the dataset made of rows `index` of the parent's dataset
  //! (repeats allowed), with the parent's bandwidth and covariate scales.
  //! Repeated rows are stored once with a multiplicity, so the result equals
  //! the main constructor applied to data.rows(index) up to rounding. The
  //! covariate weights are gathered from the parent when it has no row cap.
  PartialMeanCurve(const PartialMeanCurve& parent,
                   std::span<const std::size_t> index,
                   PartialMeanOptions options = {});

  //! Exact evaluation at an arbitrary decision (not snapped to the grid).
  double operator()(double z) const;

  const DecisionSpace& space() const { return space_; }
  const std::vector<double>& grid_values() const { return values_; }
  const KernelSpec& kernel() const { return kernel_; }
  const RewardSpec& reward() const { return reward_; }
  double h() const { return h_; }
  //! Number of observations, counting multiplicities.
  std::size_t size() const { return n_; }
  const std::vector<double>& covariate_scale() const { return scale_; }

  //! Distinct stored rows (size() unless rows carry multiplicities).
  std::size_t stored_rows() const { return r_; }
  //! Multiplicity of stored row j.
  double row_weight(std::size_t j) const { return count_.empty() ? 1.0 : count_[j]; }

  //! Stored rows used by the outer average (all unless row_cap applied).
  std::size_t outer_rows() const { return m_; }
  bool subsampled() const { return m_ < r_; }

  //! Value at grid node `node`, as cached.
  double at_node(std::size_t node) const { return values_.at(node); }

  // Raw ingredients of the stored rows, used by the plug-in diagnostics.
  const std::vector<double>& decisions() const { return z_; }
  const std::vector<double>& outcomes() const { return y_; }
  const std::vector<double>& targets() const { return t_; }
  //! Product of covariate kernel factors between outer row i and stored row j.
  double covariate_weight(std::size_t i, std::size_t j) const
  {
    const std::size_t p = pos_[i];
    if (p < lo_[j] || p >= lo_[j] + len_[j])
      return 0.0;
    return w_[off_[j] + (p - lo_[j])];
  }

private:
  void select_outer(const PartialMeanOptions& options);
  void build_bands();
  void build_weights(const PartialMeanCurve* parent, std::span<const std::size_t> source);
  void evaluate_grid(std::size_t threads);
  double evaluate(double z, std::vector<double>& num, std::vector<double>& den) const;
  double rescue_row(double z, std::size_t i) const;

  KernelSpec kernel_;
  double h_;
  RewardSpec reward_;
  DecisionSpace space_;
  std::size_t n_ = 0;          // observations, with multiplicity
  std::size_t r_ = 0;          // stored rows
  std::size_t m_ = 0;          // outer rows
  std::size_t k_ = 0;
  std::vector<double> z_;
  std::vector<double> y_;
  std::vector<double> t_;      // r(Z_j) Y_j
  std::vector<double> x_;      // scaled covariates, row-major r x k
  std::vector<double> count_;  // multiplicities, empty when all are 1
  std::vector<double> scale_;
  std::vector<std::size_t> outer_;  // outer index -> stored row, ascending
  std::vector<std::size_t> pos_;    // outer index -> band position
  std::vector<std::size_t> at_;     // band position -> outer index
  std::vector<std::size_t> lo_;     // per stored row: first band position
  std::vector<std::size_t> len_;    // per stored row: band length
  std::vector<std::size_t> off_;    // per stored row: offset into w_
  std::vector<double> w_;
  double outer_weight_ = 0.0;
  std::vector<double> values_;
};

//! R-bar(z) for one decision.
double partial_mean_eval(const PartialMeanCurve& curve, double z);

//! Grid maximizer of the cached curve (ties to the smallest node).
Optimum prescriptive_nonparam_decision(const PartialMeanCurve& curve);

//! Constants of the limiting distribution of the partial-mean estimator.
//!
//! kappa and kappa_prime are the integrals of the squared marginal kernel and
//! of its squared derivative, after normalizing the kernel to unit mass.
struct AsymptoticDiagnostics
{
  double kappa = 0.0;
  double kappa_prime = 0.0;
  std::optional<double> eta_hat;
  std::optional<double> gamma_hat;
};

//! kappa and kappa' from quadrature; with a curve, also rough plug-in
//! estimates of eta_z (kernel conditional variance over kernel conditional
//! density, averaged over the outer rows whose kernel neighborhood holds at
//! least two effective records; empty when there are none) and of Gamma = -eta kappa' / (2 R''(z)) using a finite-difference
//! second derivative on the grid step. gamma_hat is left empty when the
//! estimated curvature is not negative.
AsymptoticDiagnostics asymptotic_constants(const KernelSpec& kernel,
                                           const PartialMeanCurve* curve = nullptr,
                                           double z = 0.0);

} // namespace obsopt
