#include "obsopt/replication.hpp"
#include "obsopt/error.hpp"
#include "obsopt/optimality_test.hpp"
#include "obsopt/parallel.hpp"
#include "obsopt/predictive.hpp"
#include "obsopt/prescriptive_nonparam.hpp"
#include "obsopt/prescriptive_param.hpp"
#include "obsopt/rng.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace obsopt {

Strategy Strategy::parse(const std::string& text)
{
  if (text == "oracle")
    return { StrategyKind::oracle_optimum, 0.0 };
  if (text.rfind("fixed:", 0) == 0)
    return { StrategyKind::fixed, parse_setting(text.substr(6), "fixed decision") };
  if (text == "predictive-nonparam")
    return { StrategyKind::predictive_nonparam, 0.0 };
  if (text == "predictive-param")
    return { StrategyKind::predictive_param, 0.0 };
  if (text == "prescriptive-nonparam")
    return { StrategyKind::prescriptive_nonparam, 0.0 };
  if (text == "prescriptive-gps")
    return { StrategyKind::prescriptive_gps, 0.0 };
  throw std::invalid_argument("unknown strategy '" + text +
                              "' (oracle|fixed:<z>|predictive-nonparam|predictive-param|"
                              "prescriptive-nonparam|prescriptive-gps)");
}

std::string Strategy::name() const
{
  switch (kind) {
    case StrategyKind::oracle_optimum:
      return "oracle";
    case StrategyKind::fixed:
      return "fixed:" + format_number(value);
    case StrategyKind::predictive_nonparam:
      return "predictive-nonparam";
    case StrategyKind::predictive_param:
      return "predictive-param";
    case StrategyKind::prescriptive_nonparam:
      return "prescriptive-nonparam";
    case StrategyKind::prescriptive_gps:
      return "prescriptive-gps";
  }
  return "?";
}

double quantile(std::vector<double> values, double p)
{
  if (values.empty())
    throw std::invalid_argument("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("quantile level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

namespace {

double decide(const Strategy& s,
              const ObservationalDataset& data,
              const ReplicationConfig& config,
              const ResponseOracle& oracle,
              std::optional<OptimalityTester>& tester)
{
  switch (s.kind) {
    case StrategyKind::oracle_optimum:
      return optimize_scalar_curve(
               [&](double z) { return true_reward(oracle, config.reward, z); }, config.space)
        .z;
    case StrategyKind::fixed:
      return s.value;
    case StrategyKind::predictive_nonparam: {
      const auto kernel =
        KernelSpec::make(config.kernel, 1, BandwidthRule::rate(config.predictive_scale));
      return predictive_decision(fit_predictive_nonparam(data, kernel, config.reward),
                                 config.space)
        .z;
    }
    case StrategyKind::predictive_param:
      return predictive_decision(
               fit_predictive_param(data, PredictiveFamily::ols_linear, config.reward),
               config.space)
        .z;
    case StrategyKind::prescriptive_nonparam:
      // the tester builds exactly this curve
      return tester->z_bar();
    case StrategyKind::prescriptive_gps: {
      const auto treatment = fit_treatment_model(data, TreatmentFamily::gaussian_identity);
      const auto gps = impute_gps(treatment, data);
      const auto outcome =
        fit_outcome_model(data, gps, OutcomeFamily::linear, GpsFeature::log);
      return gps_prescribe(treatment, outcome, data, config.reward, config.space).optimum.z;
    }
  }
  return 0.0;
}

} // namespace

ReplicationReport replication_study(const std::vector<Strategy>& strategies,
                                    const std::vector<std::size_t>& ns,
                                    const ReplicationConfig& config)
{
  if (strategies.empty() || ns.empty() || config.reps == 0)
    throw std::invalid_argument("replication needs strategies, sample sizes and reps >= 1");
  const auto oracle = oracle_example3(config.instance);

  ReplicationReport report;
  report.optimal_reward =
    optimize_scalar_curve([&](double z) { return true_reward(oracle, config.reward, z); },
                          config.space)
      .value;

  const std::size_t per_strategy = ns.size() * config.reps;
  const std::size_t jobs = strategies.size() * per_strategy;
  report.records.resize(jobs);
  parallel_for(jobs, config.threads, [&](std::size_t job) {
    ReplicationRecord& rec = report.records[job];
    rec.strategy = job / per_strategy;
    rec.n = ns[(job % per_strategy) / config.reps];
    rec.rep = job % config.reps;
    rec.seed = derive_seed(config.seed, { rec.strategy, rec.n, rec.rep });
    const Strategy& strategy = strategies[rec.strategy];
    try {
      const auto data = oracle.sampler(rec.n, rec.seed);
      std::optional<OptimalityTester> tester;
      if (config.run_test || strategy.kind == StrategyKind::prescriptive_nonparam) {
        TestConfig tc;
        tc.B = config.B;
        tc.alpha = config.alpha;
        tc.kernel = KernelSpec::make(config.kernel, 1 + data.covariates(),
                                     BandwidthRule::rate(config.prescriptive_scale));
        tc.space = config.space;
        tc.seed = derive_seed(rec.seed, { 1 });
        tc.standardize_covariates = config.standardize_covariates;
        tc.row_cap = config.row_cap;
        tc.threads = 1;
        tester.emplace(data, tc, config.reward);
      }
      rec.z = decide(strategy, data, config, oracle, tester);
      rec.profit = true_reward(oracle, config.reward, rec.z);
      if (config.run_test) {
        const auto result = tester->test(rec.z);
        rec.tested = true;
        rec.p_value = result.p_value;
        rec.reject = result.reject;
      }
    } catch (const std::exception& e) {
      rec.failed = true;
      rec.error = e.what();
    }
  });

  for (std::size_t s = 0; s < strategies.size(); ++s) {
    for (std::size_t k = 0; k < ns.size(); ++k) {
      ReplicationRow row;
      row.strategy = strategies[s].name();
      row.n = ns[k];
      std::vector<double> profits, ratios;
      std::size_t rejects = 0;
      for (std::size_t r = 0; r < config.reps; ++r) {
        const auto& rec = report.records[s * per_strategy + k * config.reps + r];
        ++row.reps;
        if (rec.failed) {
          ++row.failures;
          continue;
        }
        profits.push_back(rec.profit);
        ratios.push_back(rec.profit / report.optimal_reward);
        if (rec.tested) {
          ++row.tested;
          rejects += rec.reject;
        }
      }
      if (!profits.empty()) {
        row.median = quantile(profits, 0.5);
        row.p10 = quantile(profits, 0.1);
        row.p90 = quantile(profits, 0.9);
        row.median_ratio = quantile(ratios, 0.5);
      }
      row.rejection_rate =
        row.tested ? static_cast<double>(rejects) / static_cast<double>(row.tested) : 0.0;
      report.rows.push_back(row);
    }
  }
  return report;
}

} // namespace obsopt
