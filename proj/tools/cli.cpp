#include "cli.hpp"

#include "obsopt/obsopt.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace obsopt::cli {
namespace {

using Json = nlohmann::ordered_json;

class UsageError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// -- tables ---------------------------------------------------------------------

struct Table
{
  std::vector<std::string> columns;
  std::vector<std::vector<Json>> rows;

  void add(std::vector<Json> row) { rows.push_back(std::move(row)); }
};

std::string csv_cell(const Json& v)
{
  if (v.is_number_float())
    return format_number(v.get<double>());
  if (v.is_number())
    return v.dump();
  if (v.is_boolean())
    return v.get<bool>() ? "true" : "false";
  if (v.is_null())
    return "";
  const std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  if (s.find_first_of(",\"\n") == std::string::npos)
    return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"')
      quoted += '"';
    quoted += c;
  }
  return quoted + '"';
}

Json table_json(const Table& t)
{
  Json arr = Json::array();
  for (const auto& row : t.rows) {
    Json obj = Json::object();
    for (std::size_t c = 0; c < t.columns.size(); ++c)
      obj[t.columns[c]] = row[c];
    arr.push_back(std::move(obj));
  }
  return arr;
}

void write_table(std::ostream& os, const Table& t, const std::string& format)
{
  if (format == "json") {
    os << table_json(t).dump(2) << '\n';
    return;
  }
  for (std::size_t c = 0; c < t.columns.size(); ++c)
    os << (c ? "," : "") << t.columns[c];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c)
      os << (c ? "," : "") << csv_cell(row[c]);
    os << '\n';
  }
}

template<typename Writer>
void emit(const std::string& path, std::ostream& fallback, Writer&& writer)
{
  if (path.empty() || path == "-") {
    writer(fallback);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file)
    throw DataError("cannot open '" + path + "' for writing");
  writer(file);
  if (!file)
    throw DataError("failed writing '" + path + "'");
}

Json to_ordered(const nlohmann::json& j)
{
  return Json::parse(j.dump());
}

Json optimum_json(const Optimum& o)
{
  return Json{ { "z", o.z }, { "value", o.value } };
}

// -- config files -------------------------------------------------------------------

std::string scalar_text(const Json& v, const std::string& key)
{
  if (v.is_string())
    return v.get<std::string>();
  if (v.is_number_float())
    return format_number(v.get<double>());
  if (v.is_number() || v.is_boolean())
    return v.dump();
  throw UsageError("config key '" + key + "' must hold a scalar or a list of scalars");
}

Json load_config(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw UsageError("cannot open config '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw UsageError("config '" + path + "' is not valid JSON: " + e.what());
  }
}

//! Splices the keys of a `--config` JSON object in front of the explicit
//! flags. Keys already given on the command line are skipped, so flags win.
//! A metadata record written by a previous run is accepted as a config.
std::vector<std::string> expand_config(const std::vector<std::string>& args)
{
  std::size_t sub = 0;
  while (sub < args.size() && !args[sub].empty() && args[sub][0] == '-')
    ++sub;
  if (sub >= args.size())
    return args;

  std::optional<std::string> path;
  std::set<std::string> given;
  for (std::size_t i = sub + 1; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) != 0)
      continue;
    const auto eq = a.find('=');
    const std::string name = a.substr(2, eq == std::string::npos ? std::string::npos : eq - 2);
    given.insert(name);
    if (name == "config") {
      if (eq != std::string::npos)
        path = a.substr(eq + 1);
      else if (i + 1 < args.size())
        path = args[i + 1];
    }
  }
  if (!path)
    return args;

  Json cfg = load_config(*path);
  if (cfg.is_object() && cfg.contains("command") && cfg.contains("config")) {
    if (cfg["command"] != args[sub])
      throw UsageError("config '" + *path + "' records command '" +
                       cfg["command"].get<std::string>() + "', not '" + args[sub] + "'");
    cfg = cfg["config"];
  }
  if (!cfg.is_object())
    throw UsageError("config '" + *path + "' must be a JSON object");

  std::vector<std::string> extra;
  for (const auto& [key, value] : cfg.items()) {
    if (key == "config" || given.count(key))
      continue;
    const std::string flag = "--" + key;
    if (value.is_null())
      continue;
    if (value.is_boolean()) {
      if (value.get<bool>())
        extra.push_back(flag);
    } else if (value.is_array()) {
      for (const auto& el : value)
        extra.push_back(flag + "=" + scalar_text(el, key));
    } else {
      extra.push_back(flag + "=" + scalar_text(value, key));
    }
  }
  std::vector<std::string> out(args.begin(), args.begin() + static_cast<std::ptrdiff_t>(sub + 1));
  out.insert(out.end(), extra.begin(), extra.end());
  out.insert(out.end(), args.begin() + static_cast<std::ptrdiff_t>(sub + 1), args.end());
  return out;
}

//! Every option of the subcommand as resolved after parsing (flags as
//! booleans, unset options with a default as their default text).
Json resolved_config(const CLI::App& sub)
{
  Json cfg = Json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    const auto& names = opt->get_lnames();
    if (names.empty())
      continue;
    const std::string& name = names.front();
    if (name == "help" || name == "config" || name == "meta")
      continue;
    if (opt->get_expected_max() == 0) {
      cfg[name] = opt->count() > 0;
      continue;
    }
    if (opt->count() > 0) {
      const auto& res = opt->results();
      if (opt->get_expected_max() > 1 || res.size() > 1)
        cfg[name] = res;
      else
        cfg[name] = res.front();
    } else if (!opt->get_default_str().empty()) {
      cfg[name] = opt->get_default_str();
    }
  }
  return cfg;
}

// -- settings -----------------------------------------------------------------------

struct Common
{
  std::string config;
  std::string out;
  std::string meta;
  std::string format = "csv";
  std::size_t threads = 0;
  std::uint64_t seed = 0;
};

struct DataFlags
{
  std::string data;
  std::string kernel;
  std::string bandwidth;
  std::string reward = "margin:0";
  std::string space = "0,5,51";
  bool no_standardize = false;
  std::size_t row_cap = 0;
};

struct GpsFlags
{
  std::string treatment = "ols";
  std::string outcome = "linear";
  std::string feature = "log";
  int max_iter = 100;
  double tol = 1e-8;
};

struct Settings
{
  Common common;
  DataFlags data;
  GpsFlags gps;

  // predict
  std::string variant = "nw";
  bool quadratic = false;
  bool refine = false;

  // prescribe
  std::string method = "nonparam";
  bool diagnostics = false;

  // test
  std::optional<double> candidate;
  std::string candidate_from;
  std::string predict_bandwidth = "rate:2.5";
  std::size_t B = 100;
  double alpha = 0.05;
  bool snap = false;

  // bounds
  int theorem = 0;
  std::string sweep;
  bool clamp = false;
  bool verify = false;
  std::size_t instances = 1000;

  // simulate
  std::string instance = "example3";
  std::optional<std::size_t> n;
  double sigma = 1.0;
  double tau2 = 15.1234;
  std::string potential;
  bool expectations = false;
  bool normalize = false;

  // replicate
  std::vector<std::string> strategies;
  std::vector<std::size_t> ns;
  std::size_t reps = 64;
  std::size_t replicate_B = 50;
  std::string family = "gaussian2";
  double prescriptive_scale = 0.1;
  double predictive_scale = 2.5;
  bool no_test = false;
  std::string records;
};

void add_common(CLI::App* sub, Common& c, bool seeded)
{
  sub->add_option("--config", c.config, "JSON file of flag values (flags override it)");
  sub->add_option("--out", c.out, "result file (default: standard output)");
  sub->add_option("--meta", c.meta, "metadata file (default: <out>.meta.json)");
  sub->add_option("--format", c.format, "table format")
    ->check(CLI::IsMember({ "csv", "json" }))
    ->capture_default_str();
  sub->add_option("--threads", c.threads, "worker threads, 0 = all cores")->capture_default_str();
  if (seeded)
    sub->add_option("--seed", c.seed, "master seed")->capture_default_str();
}

void add_data(CLI::App* sub, DataFlags& d, const std::string& bandwidth)
{
  sub->add_option("--data", d.data, "dataset CSV (columns z, y, x1..xk)")->required();
  sub->add_option("--kernel", d.kernel, "gaussian2|gaussian4|epanechnikov")
    ->check(CLI::IsMember({ "gaussian2", "gaussian4", "epanechnikov" }));
  // subcommands share d, so the default is applied after parsing
  sub->add_option("--bandwidth", d.bandwidth, "rate:<c> or fixed:<h>")->default_str(bandwidth);
  sub->add_option("--reward", d.reward, "margin:<c> or unit")->capture_default_str();
  sub->add_option("--space", d.space, "decision grid lo,hi,points")->capture_default_str();
}

void add_partial_mean(CLI::App* sub, DataFlags& d)
{
  sub->add_flag("--no-standardize", d.no_standardize, "keep covariates in their units");
  sub->add_option("--row-cap", d.row_cap, "outer-average subsample size, 0 = all rows")
    ->capture_default_str();
}

void add_gps(CLI::App* sub, GpsFlags& g)
{
  sub->add_option("--treatment", g.treatment, "ols|lognormal")
    ->check(CLI::IsMember({ "ols", "gaussian", "lognormal" }))
    ->capture_default_str();
  sub->add_option("--outcome", g.outcome, "linear|logit")
    ->check(CLI::IsMember({ "linear", "logit", "logistic" }))
    ->capture_default_str();
  sub->add_option("--gps-feature", g.feature, "quad|log")
    ->check(CLI::IsMember({ "quad", "log" }))
    ->capture_default_str();
}

void add_fit_controls(CLI::App* sub, GpsFlags& g)
{
  sub->add_option("--max-iter", g.max_iter, "logistic Newton iterations")->capture_default_str();
  sub->add_option("--tol", g.tol, "logistic convergence tolerance")->capture_default_str();
}

// -- shared steps ---------------------------------------------------------------------

struct Run
{
  std::string command;
  const CLI::App* sub;
  const Settings& s;
  std::ostream& out;
  std::ostream& err;

  //! Writes the metadata record next to `primary` (or to --meta), or to the
  //! error stream when every result went to standard output.
  void metadata(const std::string& primary, Json results = Json::object()) const
  {
    Json m = Json::object();
    m["tool"] = "obsopt";
    m["version"] = version;
    m["command"] = command;
    m["config"] = resolved_config(*sub);
    m["seed"] = s.common.seed;
    m["rng"] = Rng::algorithm;
    m["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
                 std::to_string(EIGEN_MAJOR_VERSION) + "." +
                 std::to_string(EIGEN_MINOR_VERSION);
    m["compiler"] = __VERSION__;
    if (!results.empty())
      m["results"] = std::move(results);
    std::string path = s.common.meta;
    if (path.empty() && !primary.empty() && primary != "-")
      path = primary + ".meta.json";
    emit(path, err, [&](std::ostream& os) { os << m.dump(2) << '\n'; });
  }
};

ObservationalDataset load_dataset(const std::string& path)
{
  return read_dataset_csv(path);
}

TestConfig partial_mean_config(const Settings& s, const ObservationalDataset& data)
{
  const std::size_t k = data.covariates();
  if (k == 0)
    throw DataError("the partial-mean estimator needs covariate columns x1..xk");
  const auto family =
    s.data.kernel.empty() ? default_family(k) : parse_kernel_family(s.data.kernel);
  TestConfig cfg;
  cfg.kernel = KernelSpec::make(family, 1 + k, BandwidthRule::parse(s.data.bandwidth));
  cfg.space = DecisionSpace::parse(s.data.space);
  cfg.seed = s.common.seed;
  cfg.standardize_covariates = !s.data.no_standardize;
  cfg.row_cap = s.data.row_cap;
  cfg.threads = s.common.threads;
  cfg.B = s.B;
  cfg.alpha = s.alpha;
  cfg.snap = s.snap;
  return cfg;
}

Json kernel_json(const KernelSpec& k)
{
  return Json{ { "family", to_string(k.family) },
               { "order", k.order },
               { "dim", k.dim },
               { "bandwidth", k.bandwidth.str() } };
}

Table curve_table(const DecisionSpace& space, const std::vector<double>& values)
{
  Table t{ { "z", "value" }, {} };
  for (std::size_t i = 0; i < values.size(); ++i)
    t.add({ space.grid()[i], values[i] });
  return t;
}

//! Writes the curve to --out, or embeds it in the summary when --out is unset.
void place_table(const Run& run, const Table& table, const std::string& key, Json& summary)
{
  if (run.s.common.out.empty() || run.s.common.out == "-") {
    summary[key] = table_json(table);
    return;
  }
  emit(run.s.common.out, run.out, [&](std::ostream& os) {
    write_table(os, table, run.s.common.format);
  });
}

PredictiveCurve fit_predictive(const ObservationalDataset& data,
                               const std::string& variant,
                               const std::string& kernel,
                               const std::string& bandwidth,
                               const RewardSpec& reward,
                               const Settings& s)
{
  if (variant == "nw") {
    const auto family = kernel.empty() ? KernelFamily::gaussian2 : parse_kernel_family(kernel);
    return fit_predictive_nonparam(data,
                                   KernelSpec::make(family, 1, BandwidthRule::parse(bandwidth)),
                                   reward);
  }
  PredictiveParamOptions o;
  o.quadratic = s.quadratic;
  o.max_iter = s.gps.max_iter;
  o.tol = s.gps.tol;
  return fit_predictive_param(data,
                              variant == "ols" ? PredictiveFamily::ols_linear
                                               : PredictiveFamily::logistic,
                              reward,
                              o);
}

struct GpsRun
{
  TreatmentModel treatment;
  OutcomeModel outcome;
  GpsPrescription prescription;
  std::size_t imputed_floored = 0;
};

GpsRun run_gps(const ObservationalDataset& data,
               const RewardSpec& reward,
               const DecisionSpace& space,
               const Settings& s)
{
  GpsRun r;
  r.treatment = fit_treatment_model(data, parse_treatment_family(s.gps.treatment));
  const auto gps = impute_gps(r.treatment, data, &r.imputed_floored);
  r.outcome = fit_outcome_model(data, gps, parse_outcome_family(s.gps.outcome),
                                parse_gps_feature(s.gps.feature), s.gps.max_iter, s.gps.tol);
  r.prescription = gps_prescribe(r.treatment, r.outcome, data, reward, space, s.common.threads);
  return r;
}

// -- subcommands ------------------------------------------------------------------------

int cmd_predict(const Run& run)
{
  const Settings& s = run.s;
  const auto data = load_dataset(s.data.data);
  const auto reward = RewardSpec::parse(s.data.reward);
  const auto space = DecisionSpace::parse(s.data.space);
  const auto curve = fit_predictive(data, s.variant, s.data.kernel, s.data.bandwidth, reward, s);
  const auto best = predictive_decision(curve, space, s.refine);

  std::vector<double> values;
  values.reserve(space.size());
  for (double z : space.grid())
    values.push_back(curve(z));

  Json summary = Json::object();
  summary["command"] = "predict";
  summary["variant"] = s.variant;
  summary["n"] = data.size();
  summary["decision"] = optimum_json(best);
  summary["model"] = to_ordered(curve.describe());
  place_table(run, curve_table(space, values), "curve", summary);
  run.out << summary.dump(2) << '\n';
  run.metadata(s.common.out, Json{ { "decision", optimum_json(best) } });
  return exit_ok;
}

int cmd_prescribe(const Run& run)
{
  const Settings& s = run.s;
  const auto data = load_dataset(s.data.data);
  const auto reward = RewardSpec::parse(s.data.reward);
  const auto space = DecisionSpace::parse(s.data.space);

  Json summary = Json::object();
  summary["command"] = "prescribe";
  summary["method"] = s.method;
  summary["n"] = data.size();

  if (s.method == "gps") {
    const auto r = run_gps(data, reward, space, s);
    summary["treatment"] = to_ordered(nlohmann::json(r.treatment));
    summary["outcome"] = to_ordered(nlohmann::json(r.outcome));
    summary["decision"] = optimum_json(r.prescription.optimum);
    summary["floored"] = r.imputed_floored + r.prescription.floored;
    if (r.outcome.logistic && !r.outcome.logistic->converged)
      run.err << "warning: logistic outcome model did not converge\n";
    place_table(run, curve_table(space, r.prescription.curve), "curve", summary);
    run.out << summary.dump(2) << '\n';
    run.metadata(s.common.out, Json{ { "decision", optimum_json(r.prescription.optimum) } });
    return exit_ok;
  }

  const auto cfg = partial_mean_config(s, data);
  Json warnings = Json::array();
  if (const auto w = order_warning(cfg.kernel, data.covariates())) {
    run.err << "warning: " << *w << '\n';
    warnings.push_back(*w);
  }
  OptimalityTester tester(data, cfg, reward);
  const auto& curve = tester.curve();
  const auto best = prescriptive_nonparam_decision(curve);
  summary["h"] = curve.h();
  summary["kernel"] = kernel_json(cfg.kernel);
  summary["decision"] = optimum_json(best);
  summary["subsampled"] = curve.subsampled();
  summary["warnings"] = warnings;
  if (s.diagnostics) {
    const auto d = asymptotic_constants(cfg.kernel, &curve, best.z);
    Json dj = Json{ { "kappa", d.kappa }, { "kappa_prime", d.kappa_prime } };
    dj["eta_hat"] = d.eta_hat ? Json(*d.eta_hat) : Json(nullptr);
    dj["gamma_hat"] = d.gamma_hat ? Json(*d.gamma_hat) : Json(nullptr);
    summary["diagnostics"] = dj;
  }
  place_table(run, curve_table(space, curve.grid_values()), "curve", summary);
  run.out << summary.dump(2) << '\n';
  run.metadata(s.common.out, Json{ { "decision", optimum_json(best) } });
  return exit_ok;
}

int cmd_test(const Run& run)
{
  const Settings& s = run.s;
  if (s.candidate.has_value() == !s.candidate_from.empty()) {
    run.err << "error: give exactly one of --candidate and --candidate-from\n"
            << run.sub->help();
    return exit_usage;
  }
  const auto data = load_dataset(s.data.data);
  const auto reward = RewardSpec::parse(s.data.reward);
  const auto cfg = partial_mean_config(s, data);
  cfg.validate();
  if (const auto w = order_warning(cfg.kernel, data.covariates()))
    run.err << "warning: " << *w << '\n';
  OptimalityTester tester(data, cfg, reward);

  double candidate = 0.0;
  std::string source = "fixed";
  if (s.candidate) {
    candidate = *s.candidate;
  } else {
    source = s.candidate_from;
    if (source == "prescribe-nonparam") {
      candidate = tester.z_bar();
    } else if (source == "prescribe-gps") {
      candidate = run_gps(data, reward, cfg.space, s).prescription.optimum.z;
    } else {
      const std::string variant = source.substr(std::string("predict-").size());
      const auto curve =
        fit_predictive(data, variant, "", s.predict_bandwidth, reward, s);
      candidate = predictive_decision(curve, cfg.space).z;
    }
  }

  const auto r = tester.test(candidate);
  Json summary = Json::object();
  summary["command"] = "test";
  summary["candidate"] = candidate;
  summary["source"] = source;
  summary["rho_n"] = r.rho_n;
  summary["gamma_hat"] = r.gamma_hat;
  summary["scaled_statistic"] = r.scaled_statistic;
  summary["p_value"] = r.p_value;
  summary["reject"] = r.reject;
  summary["alpha"] = cfg.alpha;
  summary["B"] = cfg.B;
  summary["z_bar"] = r.z_bar;
  summary["z_hat"] = r.z_hat;
  summary["h"] = r.h;
  summary["n"] = r.n;
  summary["degenerate"] = r.degenerate;
  summary["retries"] = r.retries;

  Table draws{ { "b", "A" }, {} };
  for (std::size_t b = 0; b < r.draws.size(); ++b)
    draws.add({ b + 1, r.draws[b] });
  place_table(run, draws, "draws", summary);
  run.out << summary.dump(2) << '\n';
  run.metadata(s.common.out,
               Json{ { "p_value", r.p_value }, { "reject", r.reject }, { "retries", r.retries } });
  return exit_ok;
}

int cmd_bounds(const Run& run)
{
  const Settings& s = run.s;
  if (s.verify) {
    const auto v = verify_bounds(s.common.seed, s.instances, s.common.threads);
    Json summary = Json{ { "command", "bounds" },
                         { "instances", v.instances },
                         { "tightness_max_error", v.tightness_max_error },
                         { "grid_tightness_max_error", v.grid_tightness_max_error },
                         { "thm2_min_slack", v.thm2_min_slack },
                         { "thm3_min_slack", v.thm3_min_slack },
                         { "thm4_min_slack", v.thm4_min_slack },
                         { "violations", v.violations } };
    emit(s.common.out, run.out, [&](std::ostream& os) { os << summary.dump(2) << '\n'; });
    run.metadata(s.common.out);
    if (v.violations > 0) {
      run.err << "error: " << v.violations << " bound violations\n";
      return exit_data;
    }
    return exit_ok;
  }

  if (s.theorem == 0 || s.sweep.empty())
    throw UsageError("bounds needs --theorem and --sweep, or --verify");
  std::vector<std::string> parts;
  std::stringstream ss(s.sweep);
  for (std::string p; std::getline(ss, p, ':');)
    parts.push_back(p);
  if (parts.size() != 4)
    throw UsageError("--sweep must be <name>:<lo>:<hi>:<step>, got '" + s.sweep + "'");
  const std::string expected = s.theorem == 3 ? "r" : "gamma";
  if (parts[0] != expected)
    throw UsageError("theorem " + std::to_string(s.theorem) + " sweeps '" + expected +
                     "', got '" + parts[0] + "'");
  const double lo = parse_setting(parts[1], "sweep lower end");
  const double hi = parse_setting(parts[2], "sweep upper end");
  const double step = parse_setting(parts[3], "sweep step");

  Table t{ { expected, "bound" }, {} };
  for (const auto& p : bound_sweep(s.theorem, lo, hi, step))
    t.add({ p.x, s.clamp ? clamp_bound(p.bound) : p.bound });
  emit(s.common.out, run.out, [&](std::ostream& os) { write_table(os, t, s.common.format); });
  run.metadata(s.common.out);
  return exit_ok;
}

bool is_builtin_discrete(const std::string& name)
{
  return name == "intro" || name == "table2a" || name == "alice" || name == "bob" ||
         name == "example2";
}

void write_dataset(std::ostream& os, const ObservationalDataset& data, const std::string& format)
{
  if (format == "csv") {
    write_dataset_csv(os, data);
    return;
  }
  Table t{ { "z", "y" }, {} };
  for (std::size_t c = 0; c < data.covariates(); ++c)
    t.columns.push_back("x" + std::to_string(c + 1));
  for (Eigen::Index i = 0; i < data.z().size(); ++i) {
    std::vector<Json> row{ data.z()(i), data.y()(i) };
    for (Eigen::Index c = 0; c < data.x().cols(); ++c)
      row.push_back(data.x()(i, c));
    t.add(std::move(row));
  }
  write_table(os, t, format);
}

int cmd_simulate(const Run& run)
{
  const Settings& s = run.s;
  const bool example3 = s.instance == "example3";
  const bool example4 = s.instance == "example4";
  std::optional<DiscreteInstance> discrete;
  if (s.instance.rfind("table:", 0) == 0)
    discrete = read_discrete_csv(s.instance.substr(6), s.normalize);
  else if (is_builtin_discrete(s.instance))
    discrete = builtin_discrete_instance(s.instance);
  else if (!example3 && !example4)
    throw UsageError("unknown instance '" + s.instance +
                     "' (example3|example4|intro|table2a|alice|bob|example2|table:<file>)");

  Example3Spec spec;
  spec.sigma = s.sigma;
  spec.tau2 = s.tau2;
  spec.validate();

  if (s.expectations) {
    const auto reward = RewardSpec::parse(s.data.reward);
    Table t;
    if (discrete) {
      t.columns = { "z", "y", "predictive", "reward", "predictive_reward", "confounding" };
      auto cell = [](const std::optional<Rational>& v) {
        return v ? Json(v->str()) : Json(nullptr);
      };
      for (const auto& e : discrete_expectations(*discrete, reward))
        t.add({ e.z.str(), cell(e.mean_response), cell(e.predictive), cell(e.reward),
                cell(e.predictive_reward), cell(e.confounding) });
    } else if (example3) {
      const auto oracle = oracle_example3(spec);
      t.columns = { "z", "y", "predictive", "reward", "predictive_reward" };
      for (double z : DecisionSpace::parse(s.data.space).grid())
        t.add({ z, oracle.mean_response(z), oracle.predictive_response(z),
                true_reward(oracle, reward, z), predictive_reward(oracle, reward, z) });
    } else {
      throw UsageError("--expectations needs example3 or a discrete instance");
    }
    emit(s.common.out, run.out, [&](std::ostream& os) { write_table(os, t, s.common.format); });
    run.metadata(s.common.out);
    return exit_ok;
  }

  if (!s.n || *s.n == 0)
    throw UsageError("simulate needs --n >= 1");
  std::optional<Eigen::MatrixXd> potential;
  ObservationalDataset data = [&] {
    if (example3)
      return gen_example3(spec, *s.n, s.common.seed);
    if (example4)
      return gen_example4(*s.n, s.common.seed);
    auto sample = gen_discrete(*discrete, *s.n, s.common.seed);
    if (discrete->has_potential())
      potential = std::move(sample.potential);
    return std::move(sample.data);
  }();

  emit(s.common.out, run.out, [&](std::ostream& os) { write_dataset(os, data, s.common.format); });
  if (!s.potential.empty()) {
    if (!potential)
      throw UsageError("--potential needs a discrete instance with potential outcomes");
    Table t;
    for (const auto& d : discrete->decisions())
      t.columns.push_back("y(" + d.str() + ")");
    for (Eigen::Index i = 0; i < potential->rows(); ++i) {
      std::vector<Json> row;
      for (Eigen::Index c = 0; c < potential->cols(); ++c)
        row.push_back((*potential)(i, c));
      t.add(std::move(row));
    }
    emit(s.potential, run.out, [&](std::ostream& os) { write_table(os, t, s.common.format); });
  }
  run.metadata(s.common.out);
  return exit_ok;
}

int cmd_replicate(const Run& run)
{
  const Settings& s = run.s;
  std::vector<Strategy> strategies;
  const std::vector<std::string> names =
    s.strategies.empty() ? std::vector<std::string>{ "predictive-nonparam", "predictive-param",
                                                     "prescriptive-nonparam", "prescriptive-gps" }
                         : s.strategies;
  for (const auto& name : names)
    strategies.push_back(Strategy::parse(name));
  const std::vector<std::size_t> ns =
    s.ns.empty() ? std::vector<std::size_t>{ 100, 200, 400, 800, 1600 } : s.ns;

  ReplicationConfig cfg;
  cfg.instance.sigma = s.sigma;
  cfg.instance.tau2 = s.tau2;
  cfg.instance.validate();
  cfg.reward = RewardSpec::parse(s.data.reward);
  cfg.space = DecisionSpace::parse(s.data.space);
  cfg.seed = s.common.seed;
  cfg.reps = s.reps;
  cfg.kernel = parse_kernel_family(s.family);
  cfg.prescriptive_scale = s.prescriptive_scale;
  cfg.predictive_scale = s.predictive_scale;
  cfg.run_test = !s.no_test;
  cfg.B = s.replicate_B;
  cfg.alpha = s.alpha;
  cfg.standardize_covariates = !s.data.no_standardize;
  cfg.row_cap = s.data.row_cap;
  cfg.threads = s.common.threads;

  const auto report = replication_study(strategies, ns, cfg);
  Table t{ { "strategy", "n", "reps", "failures", "median", "p10", "p90", "median_ratio",
             "tested", "rejection_rate" },
           {} };
  for (const auto& r : report.rows)
    t.add({ r.strategy, r.n, r.reps, r.failures, r.median, r.p10, r.p90, r.median_ratio,
            r.tested, r.rejection_rate });
  emit(s.common.out, run.out, [&](std::ostream& os) { write_table(os, t, s.common.format); });

  if (!s.records.empty()) {
    Table rec{ { "strategy", "n", "rep", "seed", "failed", "error", "z", "profit", "tested",
                 "p_value", "reject" },
               {} };
    for (const auto& r : report.records)
      rec.add({ strategies[r.strategy].name(), r.n, r.rep, r.seed, r.failed, r.error, r.z,
                r.profit, r.tested, r.p_value, r.reject });
    emit(s.records, run.out, [&](std::ostream& os) { write_table(os, rec, s.common.format); });
  }
  std::size_t failures = 0;
  for (const auto& r : report.rows)
    failures += r.failures;
  run.metadata(s.common.out,
               Json{ { "optimal_reward", report.optimal_reward }, { "failures", failures } });
  return exit_ok;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  Settings s;
  CLI::App app{ "Decisions from observational data: predictive and prescriptive estimation, "
                "suboptimality bounds, and a bootstrap optimality test.",
                "obsopt" };
  app.require_subcommand(1);
  app.set_version_flag("--version", version);

  auto* simulate = app.add_subcommand("simulate", "draw a synthetic dataset");
  add_common(simulate, s.common, true);
  simulate->add_option("--instance", s.instance,
                       "example3|example4|intro|table2a|alice|bob|example2|table:<file>")
    ->capture_default_str();
  simulate->add_option("--n", s.n, "number of records");
  simulate->add_option("--sigma", s.sigma, "noise sd of the example3 outcome")
    ->capture_default_str();
  simulate->add_option("--tau2", s.tau2, "variance of the example3 price noise")
    ->capture_default_str();
  simulate->add_option("--potential", s.potential, "file for the potential outcomes");
  simulate->add_flag("--expectations", s.expectations,
                     "print exact expectations instead of sampling");
  simulate->add_flag("--normalize", s.normalize, "rescale table probabilities to sum to 1");
  simulate->add_option("--reward", s.data.reward, "margin:<c> or unit (with --expectations)")
    ->capture_default_str();
  simulate->add_option("--space", s.data.space, "decision grid lo,hi,points (example3)")
    ->capture_default_str();

  auto* predict = app.add_subcommand("predict", "fit a predictive reward curve and optimize it");
  add_common(predict, s.common, false);
  add_data(predict, s.data, "rate:2.5");
  predict->add_option("--variant", s.variant, "nw|ols|logit")
    ->check(CLI::IsMember({ "nw", "ols", "logit" }))
    ->capture_default_str();
  predict->add_flag("--quadratic", s.quadratic, "add z^2 to the parametric fit");
  predict->add_flag("--refine", s.refine, "golden-section refinement around the best node");
  add_fit_controls(predict, s.gps);

  auto* prescribe = app.add_subcommand("prescribe", "estimate the causal reward and optimize it");
  add_common(prescribe, s.common, true);
  add_data(prescribe, s.data, "rate:0.1");
  prescribe->add_option("--method", s.method, "nonparam|gps")
    ->check(CLI::IsMember({ "nonparam", "gps" }))
    ->capture_default_str();
  add_partial_mean(prescribe, s.data);
  add_gps(prescribe, s.gps);
  add_fit_controls(prescribe, s.gps);
  prescribe->add_flag("--diagnostics", s.diagnostics, "plug-in constants at the decision");

  auto* test = app.add_subcommand("test", "bootstrap test of whether a decision is optimal");
  add_common(test, s.common, true);
  add_data(test, s.data, "rate:0.1");
  add_partial_mean(test, s.data);
  test->add_option("--candidate", s.candidate, "decision to test");
  test->add_option("--candidate-from", s.candidate_from, "strategy producing the decision")
    ->check(CLI::IsMember(
      { "predict-nw", "predict-ols", "predict-logit", "prescribe-nonparam", "prescribe-gps" }));
  test->add_option("--predict-bandwidth", s.predict_bandwidth,
                   "bandwidth of --candidate-from predict-nw")
    ->capture_default_str();
  test->add_option("--B", s.B, "bootstrap draws")->capture_default_str();
  test->add_option("--alpha", s.alpha, "significance level")->capture_default_str();
  test->add_flag("--snap", s.snap, "snap the candidate to the nearest grid node");
  add_gps(test, s.gps);
  add_fit_controls(test, s.gps);

  auto* bounds = app.add_subcommand("bounds", "suboptimality bounds of predictive pricing");
  add_common(bounds, s.common, true);
  bounds->add_option("--theorem", s.theorem, "2, 3 or 4")->check(CLI::IsMember({ 2, 3, 4 }));
  bounds->add_option("--sweep", s.sweep, "gamma:<lo>:<hi>:<step> (r:... for theorem 3)");
  bounds->add_flag("--clamp", s.clamp, "clamp negative bounds at 0");
  bounds->add_flag("--verify", s.verify, "run the tightness and validity sweeps");
  bounds->add_option("--instances", s.instances, "random instances per bound")
    ->capture_default_str();

  auto* replicate = app.add_subcommand("replicate", "replication study on the example3 instance");
  add_common(replicate, s.common, true);
  replicate->add_option("--strategies", s.strategies,
                        "oracle|fixed:<z>|predictive-nonparam|predictive-param|"
                        "prescriptive-nonparam|prescriptive-gps")
    ->delimiter(',');
  replicate->add_option("--ns", s.ns, "sample sizes")->delimiter(',');
  replicate->add_option("--reps", s.reps, "replications per (strategy, n)")
    ->capture_default_str();
  replicate->add_option("--B", s.replicate_B, "bootstrap draws per test")->capture_default_str();
  replicate->add_option("--alpha", s.alpha, "significance level")->capture_default_str();
  replicate->add_flag("--no-test", s.no_test, "skip the optimality test");
  replicate->add_option("--kernel", s.family, "partial-mean kernel family")
    ->check(CLI::IsMember({ "gaussian2", "gaussian4", "epanechnikov" }))
    ->capture_default_str();
  replicate->add_option("--prescriptive-scale", s.prescriptive_scale,
                        "bandwidth constant of the partial mean")
    ->capture_default_str();
  replicate->add_option("--predictive-scale", s.predictive_scale,
                        "bandwidth constant of predictive kernel regression")
    ->capture_default_str();
  replicate->add_option("--sigma", s.sigma, "noise sd of the outcome")->capture_default_str();
  replicate->add_option("--tau2", s.tau2, "variance of the price noise")->capture_default_str();
  replicate->add_option("--reward", s.data.reward, "margin:<c> or unit")->capture_default_str();
  replicate->add_option("--space", s.data.space, "decision grid lo,hi,points")
    ->capture_default_str();
  add_partial_mean(replicate, s.data);
  replicate->add_option("--records", s.records, "file for the per-run records");

  const std::vector<std::pair<CLI::App*, int (*)(const Run&)>> commands{
    { simulate, cmd_simulate }, { predict, cmd_predict },   { prescribe, cmd_prescribe },
    { test, cmd_test },         { bounds, cmd_bounds },     { replicate, cmd_replicate },
  };

  try {
    auto expanded = expand_config(args);
    std::reverse(expanded.begin(), expanded.end());
    app.parse(expanded);
    for (const auto& [sub, fn] : commands) {
      if (!sub->parsed())
        continue;
      if (const auto* bw = sub->get_option_no_throw("--bandwidth"); bw && bw->count() == 0)
        s.data.bandwidth = bw->get_default_str();
      return fn(Run{ sub->get_name(), sub, s, out, err });
    }
    return exit_usage;
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? exit_ok : exit_usage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return exit_data;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_data;
  }
}

int run(int argc, char** argv)
{
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i)
    args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

} // namespace obsopt::cli
