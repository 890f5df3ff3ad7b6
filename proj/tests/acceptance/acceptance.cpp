// Acceptance report: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include "cli.hpp"
#include "obsopt/bounds.hpp"
#include "obsopt/discrete.hpp"
#include "obsopt/error.hpp"
#include "obsopt/example3.hpp"
#include "obsopt/optimality_test.hpp"
#include "obsopt/predictive.hpp"
#include "obsopt/prescriptive_nonparam.hpp"
#include "obsopt/prescriptive_param.hpp"
#include "obsopt/replication.hpp"
#include "obsopt/rng.hpp"
#include "oracles/oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace obsopt;

namespace {

struct Verdict
{
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what)
  {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string num(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

int failures = 0;

void criterion(const std::string& id, const std::string& name, const std::function<void(Verdict&)>& body)
{
  const auto start = std::chrono::steady_clock::now();
  Verdict v;
  try {
    body(v);
  } catch (const std::exception& e) {
    v.pass = false;
    v.note(std::string("exception: ") + e.what());
  }
  const double secs =
    std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!v.pass)
    ++failures;
  std::printf("%s %s %s (%.1f s)%s%s\n", v.pass ? "PASS" : "FAIL", id.c_str(), name.c_str(), secs,
              v.detail.empty() ? "" : ": ", v.detail.c_str());
  std::fflush(stdout);
}

// -- 1 ----------------------------------------------------------------------------------

void example3_oracle(Verdict& v)
{
  const Example3Spec spec;
  const double a = spec.predictive_intercept(), b = spec.predictive_curvature();
  v.require(std::abs(a - 22.108) <= 1e-3, "a = " + num(a));
  v.require(std::abs(b - 0.393) <= 1e-3, "b = " + num(b));
  // independent form from the conditional moments of X given Z
  v.require(std::abs(oracle::example3_predictive(0.0, spec.tau2) - a) <= 1e-12, "a disagrees with oracle");
  v.require(std::abs(oracle::example3_predictive(1.0, spec.tau2) - (a - b)) <= 1e-12,
            "b disagrees with oracle");

  const auto oracle = oracle_example3(spec);
  const auto reward = RewardSpec::margin(0.0);
  for (const auto& space : { DecisionSpace::interval(0.0, 5.0, 51), DecisionSpace::interval(0.0, 6.0, 601),
                             DecisionSpace::enumerated({ 1.0, 2.5, 4.0 }) }) {
    const auto best = optimize_scalar_curve([&](double z) { return true_reward(oracle, reward, z); }, space);
    v.require(best.z == 2.5 && best.value == 31.25, "z* = " + num(best.z) + ", R = " + num(best.value));
  }
  const auto space = DecisionSpace::interval(0.0, 6.0, 601);
  const auto tilde =
    optimize_scalar_curve([&](double z) { return predictive_reward(oracle, reward, z); }, space);
  v.require(std::abs(tilde.z - 4.330) <= 0.01 + 1e-12, "z~ = " + num(tilde.z));
  const double r = true_reward(oracle, reward, tilde.z);
  v.require(std::abs(r) <= 0.02, "R(z~) = " + num(r));
  v.note("a = " + num(a) + ", b = " + num(b) + ", z~ = " + num(tilde.z) + ", R(z~) = " + num(r));
}

// -- 2 ----------------------------------------------------------------------------------

const DiscreteExpectation& at(const std::vector<DiscreteExpectation>& table, int z)
{
  for (const auto& e : table)
    if (e.z == Rational(z))
      return e;
  throw std::runtime_error("decision " + std::to_string(z) + " missing");
}

void check_value(Verdict& v, const std::optional<Rational>& got, Rational want, const std::string& what)
{
  v.require(got.has_value() && *got == want,
            what + " = " + (got ? got->str() : std::string("undefined")) + ", want " + want.str());
}

void discrete_values(Verdict& v)
{
  const auto reward = RewardSpec::margin(19.0);
  const auto intro = discrete_expectations(builtin_discrete_instance("intro"), reward);
  check_value(v, at(intro, 20).predictive, Rational(4, 3), "intro E[Y|Z=20]");
  check_value(v, at(intro, 20).mean_response, Rational(7, 6), "intro y(20)");
  check_value(v, at(intro, 28).predictive, Rational(1, 3), "intro E[Y|Z=28]");
  check_value(v, at(intro, 28).mean_response, Rational(1, 6), "intro y(28)");
  const auto alice = discrete_expectations(builtin_discrete_instance("alice"), reward);
  check_value(v, at(alice, 20).reward, Rational(10, 9), "Alice R(20)");
  check_value(v, at(alice, 28).reward, Rational(1), "Alice R(28)");
  const auto bob = discrete_expectations(builtin_discrete_instance("bob"), reward);
  check_value(v, at(bob, 20).reward, Rational(16, 15), "Bob R(20)");
  check_value(v, at(bob, 28).reward, Rational(15, 11), "Bob R(28)");
  const auto observed = discrete_expectations(builtin_discrete_instance("table2a"), reward);
  check_value(v, at(observed, 20).predictive, Rational(10, 9), "E[Y|Z=20]");
  check_value(v, at(observed, 28).predictive, Rational(1, 9), "E[Y|Z=28]");
}

// -- 3 ----------------------------------------------------------------------------------

void bounds(Verdict& v)
{
  const double breakeven = bound_thm2(3.0 - std::sqrt(8.0));
  v.require(std::abs(breakeven) <= 1e-9, "bound_thm2(3 - sqrt 8) = " + num(breakeven));
  v.require(bound_thm4(1.0) == 0.0, "bound_thm4(1) = " + num(bound_thm4(1.0)));

  // worst-case instances, ratio from the instance's own reward functions
  double worst = 0.0;
  for (int i = 1; i <= 16; ++i) {
    const double g = i / 100.0;
    const double d0 = 2.0, lambda = 0.8, c = 0.5, eta = g * d0;
    const auto inst = worst_case_instance_thm2(d0, lambda, c, eta);
    const double ratio = inst.reward(thm2_worst_case_price(d0, lambda, c, eta)) / inst.optimal_reward();
    worst = std::max(worst, std::abs(ratio - bound_thm2(g)));
  }
  v.require(worst <= 1e-9, "worst-case ratio error " + num(worst));

  const auto sweep = verify_bounds(20240611, 1000);
  v.require(sweep.instances == 1000, "instances " + std::to_string(sweep.instances));
  v.require(sweep.tightness_max_error <= 1e-9, "tightness error " + num(sweep.tightness_max_error));
  v.require(sweep.thm2_min_slack >= -1e-9, "thm2 slack " + num(sweep.thm2_min_slack));
  v.require(sweep.thm4_min_slack >= -1e-9, "thm4 slack " + num(sweep.thm4_min_slack));
  v.note("tightness error " + num(std::max(worst, sweep.tightness_max_error)) + ", min slack thm2 " +
         num(sweep.thm2_min_slack) + ", thm4 " + num(sweep.thm4_min_slack) + ", thm3 " +
         num(sweep.thm3_min_slack));
}

// -- 4 ----------------------------------------------------------------------------------

void partial_mean_oracle(Verdict& v)
{
  const KernelFamily families[] = { KernelFamily::gaussian2, KernelFamily::gaussian4,
                                    KernelFamily::epanechnikov };
  PartialMeanOptions raw;
  raw.standardize_covariates = false;
  Rng rng(4242);
  int compared = 0, undefined = 0, mismatches = 0;
  while (compared < 50) {
    const std::size_t n = 1 + rng.index(20);
    const std::size_t k = 1 + rng.index(3);
    const auto kernel = KernelSpec::make(families[rng.index(3)], 1 + k);
    const double h = 0.3 + 1.7 * rng.uniform();
    const auto reward = RewardSpec::margin(rng.uniform() - 0.5);
    const auto space = DecisionSpace::interval(-1.5, 1.5, 13);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
    Eigen::VectorXd z(x.rows()), y(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (Eigen::Index c = 0; c < x.cols(); ++c)
        x(i, c) = rng.normal();
      z(i) = 2.0 * rng.uniform() - 1.0 + 0.5 * x(i, 0);
      y(i) = 3.0 + z(i) - z(i) * z(i) + x(i, 0) + rng.normal();
    }
    const ObservationalDataset data(x, z, y);
    std::vector<double> want;
    bool defined = true;
    for (double node : space.grid()) {
      want.push_back(oracle::partial_mean(data, kernel, h, reward, node));
      defined = defined && !std::isnan(want.back());
    }
    if (!defined) {
      ++undefined;
      try {
        PartialMeanCurve(data, kernel, h, reward, space, raw);
        ++mismatches;
      } catch (const DataError&) {
      }
      continue;
    }
    ++compared;
    const PartialMeanCurve curve(data, kernel, h, reward, space, raw);
    for (std::size_t g = 0; g < space.size(); ++g)
      if (curve.at_node(g) != want[g])
        ++mismatches;
    for (int q = 0; q < 5; ++q) {
      const double zq = 3.0 * rng.uniform() - 1.5;
      const double o = oracle::partial_mean(data, kernel, h, reward, zq);
      if (!std::isnan(o) && curve(zq) != o)
        ++mismatches;
    }
  }
  v.require(mismatches == 0, std::to_string(mismatches) + " values differ");
  v.note(std::to_string(compared) + " instances compared, " + std::to_string(undefined) +
         " undefined instances rejected");
}

// -- 5 ----------------------------------------------------------------------------------

void prescriptive_performance(Verdict& v)
{
  ReplicationConfig config;
  config.reps = 64;
  config.run_test = false;
  config.seed = 5;
  config.threads = 0;
  const auto report = replication_study(
    { Strategy::parse("prescriptive-gps"), Strategy::parse("prescriptive-nonparam"),
      Strategy::parse("predictive-nonparam"), Strategy::parse("predictive-param") },
    { 2000 }, config);
  const double floor[] = { 0.95, 0.85 };
  for (std::size_t s = 0; s < report.rows.size(); ++s) {
    const auto& row = report.rows[s];
    v.note(row.strategy + " " + num(row.median_ratio));
    v.require(row.failures == 0, row.strategy + " had " + std::to_string(row.failures) + " failed runs");
    if (s < 2)
      v.require(row.median_ratio >= floor[s], row.strategy + " below " + num(floor[s]));
    else
      v.require(row.median_ratio <= 0.3, row.strategy + " above 0.3");
  }
}

// -- 6 ----------------------------------------------------------------------------------

void calibration_and_power(Verdict& v)
{
  ReplicationConfig config;
  config.reps = 256;
  config.B = 50;
  config.alpha = 0.05;
  config.seed = 6;
  config.threads = 0;
  const auto size = replication_study({ Strategy::parse("fixed:2.5") }, { 800 }, config);
  const auto power = replication_study({ Strategy::parse("fixed:4.33") }, { 1600 }, config);
  const auto& s = size.rows.at(0);
  const auto& p = power.rows.at(0);
  v.note("rejection at z* (n=800) " + num(s.rejection_rate) + " over " + std::to_string(s.tested));
  v.note("rejection at z~ (n=1600) " + num(p.rejection_rate) + " over " + std::to_string(p.tested));
  v.require(s.failures == 0 && p.failures == 0, "failed runs");
  v.require(s.rejection_rate <= 0.10, "size above 0.10");
  v.require(p.rejection_rate >= 0.90, "power below 0.90");
}

// -- 7 ----------------------------------------------------------------------------------

struct Captured
{
  int code;
  std::string out;
  std::string err;
};

Captured invoke(std::vector<std::string> args)
{
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return { code, out.str(), err.str() };
}

void determinism(Verdict& v)
{
  const std::string data = std::string(OBSOPT_TEST_TMPDIR) + "/acceptance_data.csv";
  const auto sim = invoke({ "simulate", "--instance", "example3", "--n", "300", "--seed", "7", "--out", data });
  v.require(sim.code == 0, "simulate failed: " + sim.err);
  const std::vector<std::vector<std::string>> commands{
    { "simulate", "--instance", "example3", "--n", "100", "--seed", "7" },
    { "simulate", "--instance", "bob", "--n", "50", "--seed", "3" },
    { "predict", "--data", data },
    { "predict", "--data", data, "--variant", "ols" },
    { "prescribe", "--data", data },
    { "prescribe", "--data", data, "--method", "gps" },
    { "test", "--data", data, "--candidate", "2.5", "--B", "40", "--seed", "1" },
    { "bounds", "--theorem", "2", "--verify", "--instances", "200", "--seed", "2" },
    { "replicate", "--strategies", "oracle,prescriptive-nonparam,prescriptive-gps", "--ns", "200", "--reps", "4",
      "--B", "10", "--seed", "9" },
  };
  for (const auto& cmd : commands) {
    auto serial = cmd, parallel = cmd;
    serial.insert(serial.end(), { "--threads", "1" });
    parallel.insert(parallel.end(), { "--threads", "4" });
    const auto a = invoke(serial), b = invoke(serial), c = invoke(parallel);
    const std::string name = cmd[0] + (cmd.size() > 2 ? " " + cmd[2] : "");
    v.require(a.code == 0, name + " exit " + std::to_string(a.code));
    v.require(a.out == b.out && a.err == b.err, name + " differs between runs");
    v.require(a.out == c.out, name + " differs across thread counts");
  }
  v.note(std::to_string(commands.size()) + " commands, repeated and at 1 and 4 threads");
}

// -- 8 ----------------------------------------------------------------------------------

void kernel_moments(Verdict& v)
{
  double worst = 0.0;
  for (auto family : { KernelFamily::gaussian2, KernelFamily::gaussian4, KernelFamily::epanechnikov }) {
    const int s = family_order(family);
    const bool compact = family == KernelFamily::epanechnikov;
    const double lim = compact ? 1.0 : 12.0;
    for (std::size_t d = 1; d <= 3; ++d) {
      const auto spec = KernelSpec::make(family, d);
      const int points = d == 3 ? 161 : 801;  // odd: Simpson panels
      const double step = 2.0 * lim / (points - 1);
      std::vector<double> node(static_cast<std::size_t>(points)), weight(node.size());
      for (int i = 0; i < points; ++i) {
        node[static_cast<std::size_t>(i)] = -lim + i * step;
        weight[static_cast<std::size_t>(i)] =
          step / 3.0 * ((i == 0 || i == points - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0));
      }
      // multi-indices with |alpha| <= s, the last ones of order s
      std::vector<std::vector<int>> alphas;
      std::vector<int> alpha(d, 0);
      std::function<void(std::size_t, int)> enumerate = [&](std::size_t pos, int left) {
        if (pos == d) {
          alphas.push_back(alpha);
          return;
        }
        for (int a = 0; a <= left; ++a) {
          alpha[pos] = a;
          enumerate(pos + 1, left - a);
        }
      };
      enumerate(0, s);
      std::vector<double> moment(alphas.size(), 0.0);
      std::vector<double> u(d);
      std::vector<std::size_t> idx(d, 0);
      const std::size_t total = static_cast<std::size_t>(std::pow(points, static_cast<double>(d)));
      for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rest = flat;
        double w = 1.0;
        for (std::size_t c = 0; c < d; ++c) {
          idx[c] = rest % static_cast<std::size_t>(points);
          rest /= static_cast<std::size_t>(points);
          u[c] = node[idx[c]];
          w *= weight[idx[c]];
        }
        const double k = kernel_eval(spec, u);
        if (k == 0.0)
          continue;
        for (std::size_t m = 0; m < alphas.size(); ++m) {
          double p = 1.0;
          for (std::size_t c = 0; c < d; ++c)
            p *= std::pow(u[c], alphas[m][c]);
          moment[m] += w * k * p;
        }
      }
      bool some_order_s_nonzero = false;
      for (std::size_t m = 0; m < alphas.size(); ++m) {
        int order = 0;
        for (int a : alphas[m])
          order += a;
        if (order == 0) {
          // kernels are unnormalized: sqrt(2 pi) or 4/3 per dimension
          const double mass = std::pow(compact ? 4.0 / 3.0 : std::sqrt(2.0 * std::numbers::pi),
                                       static_cast<double>(d));
          v.require(std::abs(moment[m] - mass) <= 1e-6 * mass,
                    to_string(family) + " d=" + std::to_string(d) + " mass " + num(moment[m]));
        } else if (order < s) {
          worst = std::max(worst, std::abs(moment[m]));
          v.require(std::abs(moment[m]) <= 1e-6,
                    to_string(family) + " d=" + std::to_string(d) + " moment " + num(moment[m]));
        } else if (std::abs(moment[m]) > 1e-3) {
          some_order_s_nonzero = true;
        }
      }
      v.require(some_order_s_nonzero, to_string(family) + " d=" + std::to_string(d) + " order exceeds " +
                                        std::to_string(s));
    }
  }
  v.note("largest moment below the order " + num(worst));
}

// -- Example 4 shape ---------------------------------------------------------------------

void example4_pipeline(Verdict& v)
{
  const auto data = gen_example4(2000, 44);
  const auto space = DecisionSpace::interval(2.5, 8.0, 56);
  const auto reward = RewardSpec::margin(0.02);
  const auto treatment = fit_treatment_model(data, TreatmentFamily::lognormal);
  const auto gps = impute_gps(treatment, data);
  const auto outcome = fit_outcome_model(data, gps, OutcomeFamily::logistic, GpsFeature::quad);
  v.require(outcome.logistic.has_value() && outcome.logistic->converged, "logistic fit did not converge");
  const auto res = gps_prescribe(treatment, outcome, data, reward, space);
  v.require(res.optimum.z >= 2.5 && res.optimum.z <= 8.0, "decision " + num(res.optimum.z) + " outside");
  TestConfig config;
  config.B = 30;
  config.seed = 4;
  config.space = space;
  config.kernel = KernelSpec::make(default_family(2), 3, BandwidthRule::rate(0.1));
  const auto test = optimality_test(data, res.optimum.z, config, reward);
  v.require(std::isfinite(test.p_value) && test.p_value >= 0.0 && test.p_value <= 1.0,
            "p-value " + num(test.p_value));
  v.note("decision " + num(res.optimum.z) + ", p-value " + num(test.p_value));
}

} // namespace

int main()
{
  criterion("1", "Example 3 closed-form oracle", example3_oracle);
  criterion("2", "discrete instances in exact arithmetic", discrete_values);
  criterion("3", "bound formulas, tightness and validity sweeps", bounds);
  criterion("4", "partial mean equals the brute-force double loop", partial_mean_oracle);
  criterion("8", "kernel moments by quadrature", kernel_moments);
  criterion("7", "byte-reproducible commands", determinism);
  criterion("E4", "binary-outcome GPS pipeline integrity", example4_pipeline);
  criterion("5", "prescriptive performance at n = 2000", prescriptive_performance);
  criterion("6", "test calibration at z* and power at z~", calibration_and_power);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
