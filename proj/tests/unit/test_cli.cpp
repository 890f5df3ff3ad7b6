#include "cli.hpp"
#include "obsopt/bounds.hpp"
#include "obsopt/core.hpp"

#include <catch_amalgamated.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace obsopt;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

struct Outcome
{
  int code = 0;
  std::string out;
  std::string err;
};

Outcome invoke(const std::vector<std::string>& args)
{
  std::ostringstream out, err;
  Outcome o;
  o.code = cli::run(args, out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

std::string tmp(const std::string& name)
{
  return std::string(OBSOPT_TEST_TMPDIR) + "/" + name;
}

std::string slurp(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text)
{
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);)
    out.push_back(line);
  return out;
}

void write(const std::string& path, const std::string& text)
{
  std::ofstream(path, std::ios::binary) << text;
}

} // namespace

TEST_CASE("cli exit codes", "[cli]")
{
  CHECK(invoke({ "bounds", "--theorem", "2", "--sweep", "gamma:0:0.1:0.05" }).code == cli::exit_ok);
  CHECK(invoke({}).code == cli::exit_usage);
  CHECK(invoke({ "frobnicate" }).code == cli::exit_usage);
  CHECK(invoke({ "bounds", "--no-such-flag" }).code == cli::exit_usage);

  const auto no_candidate = invoke({ "test", "--data", tmp("missing.csv") });
  CHECK(no_candidate.code == cli::exit_usage);
  CHECK_THAT(no_candidate.err, ContainsSubstring("Usage"));

  const std::string bad = tmp("bad.csv");
  write(bad, "z,y,x1\n1,2,3\n1,abc,3\n");
  const auto malformed = invoke({ "predict", "--data", bad });
  CHECK(malformed.code == cli::exit_data);
  CHECK_THAT(malformed.err, ContainsSubstring("line 3"));

  const std::string missing = tmp("missing_column.csv");
  write(missing, "z,x1\n1,3\n2,4\n");
  CHECK(invoke({ "predict", "--data", missing }).code == cli::exit_data);

  // every decision sits at z = 1: the partial mean has no mass near z = 4
  const std::string narrow = tmp("narrow.csv");
  write(narrow, "z,y,x1\n1,1,0\n1,2,1\n1,3,2\n");
  CHECK(invoke({ "prescribe", "--data", narrow, "--kernel", "epanechnikov", "--bandwidth", "fixed:0.5",
                 "--space", "0,5,11" })
          .code == cli::exit_data);
}

TEST_CASE("cli bounds sweep", "[cli]")
{
  const auto r = invoke({ "bounds", "--theorem", "2", "--sweep", "gamma:0:0.17:0.01" });
  REQUIRE(r.code == cli::exit_ok);
  const auto rows = lines(r.out);
  REQUIRE(rows.size() == 19);
  CHECK(rows[0] == "gamma,bound");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto comma = rows[i].find(',');
    const double g = std::stod(rows[i].substr(0, comma));
    const double b = std::stod(rows[i].substr(comma + 1));
    CHECK_THAT(g, WithinAbs(0.01 * static_cast<double>(i - 1), 1e-12));
    CHECK_THAT(b, WithinAbs(1.0 - 4.0 * g - 4.0 * g * std::sqrt(g) - g * g, 1e-12));
  }
  const auto meta = nlohmann::json::parse(r.err);
  CHECK(meta["command"] == "bounds");
  CHECK(meta["config"].contains("sweep"));
}

TEST_CASE("cli simulate is byte-reproducible", "[cli]")
{
  const std::string a = tmp("sim_a.csv"), b = tmp("sim_b.csv");
  for (const auto& path : { a, b })
    REQUIRE(invoke({ "simulate", "--instance", "example3", "--n", "100", "--seed", "7", "--out", path }).code ==
            cli::exit_ok);
  CHECK(slurp(a) == slurp(b));
  auto meta_a = nlohmann::json::parse(slurp(a + ".meta.json"));
  auto meta_b = nlohmann::json::parse(slurp(b + ".meta.json"));
  CHECK(meta_a["config"]["out"] == a);
  meta_a["config"].erase("out");
  meta_b["config"].erase("out");
  CHECK(meta_a == meta_b);
  CHECK(lines(slurp(a)).size() == 101);
  const auto data = read_dataset_csv(a);
  CHECK(data.size() == 100);

  // regenerate from the metadata record
  const std::string c = tmp("sim_c.csv");
  REQUIRE(invoke({ "simulate", "--config", a + ".meta.json", "--out", c }).code == cli::exit_ok);
  CHECK(slurp(c) == slurp(a));
}

TEST_CASE("cli discrete expectations", "[cli]")
{
  const auto r = invoke({ "simulate", "--instance", "alice", "--expectations" });
  REQUIRE(r.code == cli::exit_ok);
  const auto rows = lines(r.out);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == "z,y,predictive,reward,predictive_reward,confounding");
  CHECK(rows[1].starts_with("20,10/9,"));
  CHECK(rows[2].starts_with("28,1/9,"));
  const auto bob = invoke({ "simulate", "--instance", "bob", "--expectations" });
  REQUIRE(bob.code == cli::exit_ok);
  CHECK_THAT(bob.out, ContainsSubstring("20,16/15,"));
}

TEST_CASE("cli analysis commands are byte-reproducible across threads", "[cli]")
{
  const std::string data = tmp("sim_threads.csv");
  REQUIRE(invoke({ "simulate", "--instance", "example3", "--n", "200", "--seed", "3", "--out", data }).code ==
          cli::exit_ok);
  const std::vector<std::vector<std::string>> commands{
    { "predict", "--data", data },
    { "prescribe", "--data", data },
    { "prescribe", "--data", data, "--method", "gps" },
    { "test", "--data", data, "--candidate", "2.5", "--B", "20", "--seed", "11" },
    { "test", "--data", data, "--candidate-from", "predict-nw", "--B", "20", "--seed", "11" },
    { "replicate", "--strategies", "oracle,prescriptive-nonparam", "--ns", "150", "--reps", "3", "--B", "10",
      "--seed", "2" },
  };
  for (const auto& cmd : commands) {
    auto one = cmd, many = cmd;
    one.insert(one.end(), { "--threads", "1" });
    many.insert(many.end(), { "--threads", "4" });
    const auto a = invoke(one);
    const auto b = invoke(many);
    INFO(cmd[0]);
    REQUIRE(a.code == cli::exit_ok);
    REQUIRE(b.code == cli::exit_ok);
    CHECK(a.out == b.out);
    CHECK(invoke(one).out == a.out);
  }
}

TEST_CASE("cli config files and flag precedence", "[cli]")
{
  const std::string cfg = tmp("bounds.json");
  write(cfg, R"({"theorem": 4, "sweep": "gamma:0:1:0.5"})");
  const auto from_file = invoke({ "bounds", "--config", cfg });
  REQUIRE(from_file.code == cli::exit_ok);
  const auto rows = lines(from_file.out);
  REQUIRE(rows.size() == 4);
  CHECK(rows[3] == "1,0");

  const auto overridden = invoke({ "bounds", "--config", cfg, "--theorem", "3", "--sweep", "r:0:1:0.5" });
  REQUIRE(overridden.code == cli::exit_ok);
  CHECK(lines(overridden.out)[2] == "0.5,0.75");

  write(cfg, "{not json");
  CHECK(invoke({ "bounds", "--config", cfg }).code == cli::exit_usage);
  CHECK(invoke({ "bounds", "--config", tmp("absent.json") }).code == cli::exit_usage);
  CHECK(invoke({ "bounds", "--theorem", "2", "--sweep", "gamma:0:x:0.1" }).code == cli::exit_usage);
  CHECK(invoke({ "replicate", "--strategies", "fixed:abc", "--ns", "100" }).code == cli::exit_usage);
}

TEST_CASE("cli JSON output", "[cli]")
{
  const auto r = invoke({ "bounds", "--theorem", "3", "--sweep", "r:0:1:0.5", "--format", "json" });
  REQUIRE(r.code == cli::exit_ok);
  const auto j = nlohmann::json::parse(r.out);
  REQUIRE(j.is_array());
  REQUIRE(j.size() == 3);
  CHECK(j[1]["bound"].get<double>() == bound_thm3(0.5));
}
