#pragma once

#include "obsopt/core.hpp"
#include "obsopt/example3.hpp"
#include "obsopt/kernels.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace obsopt {

enum class StrategyKind
{
  oracle_optimum,         //!< grid maximizer of the true reward
  fixed,                  //!< a user-given decision
  predictive_nonparam,    //!< kernel regression of r(Z)Y on Z
  predictive_param,       //!< OLS of Y on Z
  prescriptive_nonparam,  //!< partial-mean estimator
  prescriptive_gps        //!< OLS treatment model, linear outcome in (z, ln q)
};

struct Strategy
{
  StrategyKind kind = StrategyKind::oracle_optimum;
  double value = 0.0;  //!< decision of the fixed strategy

  //! "oracle", "fixed:<z>", "predictive-nonparam", "predictive-param",
  //! "prescriptive-nonparam", "prescriptive-gps".
  static Strategy parse(const std::string& text);
  std::string name() const;
};

struct ReplicationConfig
{
  Example3Spec instance;
  RewardSpec reward = RewardSpec::margin(0.0);
  DecisionSpace space = DecisionSpace::interval(0.0, 5.0, 51);
  std::uint64_t seed = 0;
  std::size_t reps = 64;
  KernelFamily kernel = KernelFamily::gaussian2;
  double prescriptive_scale = 0.1;  //!< bandwidth constant of the partial mean
  double predictive_scale = 2.5;    //!< bandwidth constant of predictive NW
  bool run_test = true;
  std::size_t B = 50;
  double alpha = 0.05;
  bool standardize_covariates = true;
  std::size_t row_cap = 0;
  std::size_t threads = 1;
};

//! One (strategy, n, rep) run.
struct ReplicationRecord
{
  std::size_t strategy = 0;
  std::size_t n = 0;
  std::size_t rep = 0;
  std::uint64_t seed = 0;  //!< dataset seed
  bool failed = false;
  std::string error;
  double z = 0.0;
  double profit = 0.0;  //!< R(z) under the oracle
  bool tested = false;
  double p_value = 1.0;
  bool reject = false;
};

struct ReplicationRow
{
  std::string strategy;
  std::size_t n = 0;
  std::size_t reps = 0;
  std::size_t failures = 0;
  double median = 0.0;  //!< of R(z-hat)
  double p10 = 0.0;
  double p90 = 0.0;
  double median_ratio = 0.0;  //!< median of R(z-hat) / R(z*)
  std::size_t tested = 0;
  double rejection_rate = 0.0;
};

struct ReplicationReport
{
  double optimal_reward = 0.0;
  std::vector<ReplicationRow> rows;
  std::vector<ReplicationRecord> records;
};

//! Quantile with linear interpolation between order statistics
//! (h = (m - 1) p, the default of R and NumPy). Throws on empty input.
double quantile(std::vector<double> values, double p);

//! For each strategy, sample size and replication: draw an instance dataset
//! with seed derive_seed(config.seed, {strategy, n, rep}), compute the
//! strategy's decision, score it with the true reward and, when enabled,
//! run the optimality test at that decision (bootstrap seed derived from the
//! dataset seed). Failed runs are recorded and left out of the aggregates.
ReplicationReport replication_study(const std::vector<Strategy>& strategies,
                                    const std::vector<std::size_t>& ns,
                                    const ReplicationConfig& config);

} // namespace obsopt
