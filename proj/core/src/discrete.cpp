#include "obsopt/discrete.hpp"
#include "obsopt/error.hpp"
#include "obsopt/rng.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace obsopt {

DiscreteInstance DiscreteInstance::make(std::vector<Rational> decisions,
                                        std::vector<DiscreteRow> rows,
                                        bool normalize)
{
  if (rows.empty())
    throw std::invalid_argument("discrete instance needs at least one row");
  const bool potential = !rows.front().potential.empty();
  const std::size_t k = rows.front().x.size();

  if (potential) {
    std::sort(decisions.begin(), decisions.end());
    if (std::adjacent_find(decisions.begin(), decisions.end()) != decisions.end())
      throw std::invalid_argument("discrete decisions must be distinct");
  } else {
    decisions.clear();
    for (const auto& r : rows)
      decisions.push_back(r.z);
    std::sort(decisions.begin(), decisions.end());
    decisions.erase(std::unique(decisions.begin(), decisions.end()), decisions.end());
  }

  Rational total(0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& r = rows[i];
    const std::string where = "discrete row " + std::to_string(i);
    if (r.probability < Rational(0))
      throw std::invalid_argument(where + " has a negative probability");
    if (r.x.size() != k)
      throw std::invalid_argument(where + " has a different number of covariates");
    if (potential) {
      if (r.potential.size() != decisions.size())
        throw std::invalid_argument(where + " needs one potential outcome per decision");
      const auto at = std::find(decisions.begin(), decisions.end(), r.z);
      if (at == decisions.end())
        throw std::invalid_argument(where + " has a decision outside the decision list");
      r.y = r.potential[static_cast<std::size_t>(at - decisions.begin())];
    } else if (!r.potential.empty()) {
      throw std::invalid_argument(where + " mixes observed-only and potential rows");
    }
    total += r.probability;
  }
  if (normalize) {
    if (total == Rational(0))
      throw std::invalid_argument("discrete probabilities sum to zero");
    for (auto& r : rows)
      r.probability = r.probability / total;
  } else if (std::abs(total.to_double() - 1.0) > 1e-12) {
    throw std::invalid_argument("discrete probabilities sum to " + total.str() +
                                ", not 1");
  }

  DiscreteInstance out;
  out.decisions_ = std::move(decisions);
  out.rows_ = std::move(rows);
  out.has_potential_ = potential;
  return out;
}

// -- built-in tables ------------------------------------------------------------------

namespace {

Rational q(const char* text)
{
  return Rational::parse(text);
}

DiscreteRow pot(int z, int y20, int y28, const char* p)
{
  return { Rational(z), Rational(z == 20 ? y20 : y28), { Rational(y20), Rational(y28) },
           {}, q(p) };
}

DiscreteRow obs(int z, int y, const char* p, std::vector<Rational> x = {})
{
  return { Rational(z), Rational(y), {}, std::move(x), q(p) };
}

} // namespace

DiscreteInstance builtin_discrete_instance(const std::string& name)
{
  const std::vector<Rational> prices{ Rational(20), Rational(28) };
  if (name == "intro") {
    // six days: observed (Z, Y) and the outcome the other price would have had
    return DiscreteInstance::make(prices, { pot(20, 1, 0, "1/6"), pot(28, 1, 0, "1/6"),
                                            pot(28, 1, 1, "1/6"), pot(20, 2, 0, "1/6"),
                                            pot(20, 1, 0, "1/6"), pot(28, 1, 0, "1/6") });
  }
  if (name == "table2a") {
    return DiscreteInstance::make({}, { obs(20, 1, "8/18"), obs(20, 2, "1/18"),
                                        obs(28, 0, "8/18"), obs(28, 1, "1/18") });
  }
  if (name == "alice") {
    std::vector<DiscreteRow> rows;
    for (int z : { 20, 28 }) {
      rows.push_back(pot(z, 1, 0, "32/81"));
      rows.push_back(pot(z, 1, 1, "4/81"));
      rows.push_back(pot(z, 2, 0, "4/81"));
      rows.push_back(pot(z, 2, 1, "1/162"));
    }
    return DiscreteInstance::make(prices, std::move(rows));
  }
  if (name == "bob") {
    return DiscreteInstance::make(prices, { pot(20, 1, 0, "40/99"), pot(20, 1, 1, "4/99"),
                                            pot(20, 2, 0, "0"), pot(20, 2, 1, "1/18"),
                                            pot(28, 1, 0, "4/9"), pot(28, 1, 1, "2/45"),
                                            pot(28, 2, 0, "0"), pot(28, 2, 1, "1/90") });
  }
  if (name == "example2") {
    const Rational off(0), game(1);
    return DiscreteInstance::make({}, { obs(20, 1, "4/9", { off }), obs(28, 0, "4/9", { off }),
                                        obs(28, 1, "2/45", { off }), obs(20, 2, "1/18", { game }),
                                        obs(28, 1, "1/90", { game }) });
  }
  throw std::invalid_argument("unknown discrete instance '" + name +
                              "' (intro|table2a|alice|bob|example2)");
}

// -- CSV ------------------------------------------------------------------------------

namespace {

std::vector<std::string> split(const std::string& line)
{
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',')
    out.emplace_back();
  return out;
}

} // namespace

DiscreteInstance read_discrete_csv(std::istream& in, bool normalize)
{
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string::npos)
      break;
  }
  if (line_no == 0 || line.find_first_not_of(" \t\r") == std::string::npos)
    throw DataError("discrete CSV is empty");
  const auto header = split(line);

  int z_col = -1, y_col = -1, p_col = -1;
  std::vector<std::pair<int, Rational>> pot_cols;
  std::vector<std::pair<int, int>> x_cols;  // (column, covariate number)
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto& h = header[c];
    const int col = static_cast<int>(c);
    if (h == "z")
      z_col = col;
    else if (h == "y")
      y_col = col;
    else if (h == "p" || h == "probability")
      p_col = col;
    else if (h.size() > 3 && h.rfind("y(", 0) == 0 && h.back() == ')')
      pot_cols.emplace_back(col, Rational::parse(h.substr(2, h.size() - 3)));
    else if (h.size() > 1 && h[0] == 'x' &&
             h.find_first_not_of("0123456789", 1) == std::string::npos)
      x_cols.emplace_back(col, std::stoi(h.substr(1)));
    else
      throw DataError("line " + std::to_string(line_no) + ": unknown column '" + h + "'");
  }
  if (z_col < 0 || p_col < 0)
    throw DataError("line " + std::to_string(line_no) +
                    ": discrete CSV needs columns z and p");
  if ((y_col < 0) == pot_cols.empty())
    throw DataError("line " + std::to_string(line_no) +
                    ": discrete CSV needs either a y column or y(<decision>) columns");
  std::sort(x_cols.begin(), x_cols.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });
  for (std::size_t i = 0; i < x_cols.size(); ++i)
    if (x_cols[i].second != static_cast<int>(i + 1))
      throw DataError("line " + std::to_string(line_no) +
                      ": covariate columns must be x1..xk");

  std::vector<Rational> decisions;
  for (const auto& [col, d] : pot_cols)
    decisions.push_back(d);
  std::vector<DiscreteRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    const auto cells = split(line);
    if (cells.size() != header.size())
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, found " +
                      std::to_string(cells.size()));
    try {
      DiscreteRow r;
      r.z = Rational::parse(cells[static_cast<std::size_t>(z_col)]);
      r.probability = Rational::parse(cells[static_cast<std::size_t>(p_col)]);
      if (y_col >= 0)
        r.y = Rational::parse(cells[static_cast<std::size_t>(y_col)]);
      for (const auto& [col, d] : pot_cols)
        r.potential.push_back(Rational::parse(cells[static_cast<std::size_t>(col)]));
      for (const auto& [col, num] : x_cols)
        r.x.push_back(Rational::parse(cells[static_cast<std::size_t>(col)]));
      rows.push_back(std::move(r));
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  try {
    return DiscreteInstance::make(std::move(decisions), std::move(rows), normalize);
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
}

DiscreteInstance read_discrete_csv(const std::string& path, bool normalize)
{
  std::ifstream in(path);
  if (!in)
    throw DataError("cannot open '" + path + "'");
  return read_discrete_csv(in, normalize);
}

// -- expectations ---------------------------------------------------------------------

std::vector<DiscreteExpectation> discrete_expectations(const DiscreteInstance& instance,
                                                       const RewardSpec& reward)
{
  const bool margin = reward.form() == RewardSpec::Form::margin;
  const Rational cost = margin ? Rational::from_double(reward.cost()) : Rational(0);
  auto r = [&](const Rational& z) { return margin ? z - cost : Rational(1); };

  std::vector<DiscreteExpectation> out;
  const auto& ds = instance.decisions();
  for (std::size_t d = 0; d < ds.size(); ++d) {
    DiscreteExpectation e;
    e.z = ds[d];

    Rational mass(0), weighted(0);
    for (const auto& row : instance.rows()) {
      if (row.z == e.z) {
        mass += row.probability;
        weighted += row.probability * row.y;
      }
    }
    if (mass > Rational(0)) {
      e.predictive = weighted / mass;
      e.predictive_reward = r(e.z) * *e.predictive;
    }

    if (instance.has_potential()) {
      Rational mean(0);
      for (const auto& row : instance.rows())
        mean += row.probability * row.potential[d];
      e.mean_response = mean;
      e.reward = r(e.z) * mean;
      if (mass > Rational(0)) {
        // noise of the potential outcome around its mean, among days priced at z
        Rational noise(0);
        for (const auto& row : instance.rows())
          if (row.z == e.z)
            noise += row.probability * (row.potential[d] - mean);
        e.confounding = noise / mass;
      }
    }
    out.push_back(std::move(e));
  }
  return out;
}

// -- sampling -------------------------------------------------------------------------

DiscreteSample gen_discrete(const DiscreteInstance& instance, std::size_t n, std::uint64_t seed)
{
  if (n == 0)
    throw std::invalid_argument("sample size must be positive");
  const auto& rows = instance.rows();
  std::vector<double> cdf;
  double acc = 0.0;
  for (const auto& row : rows) {
    acc += row.probability.to_double();
    cdf.push_back(acc);
  }
  const std::size_t k = instance.covariates();
  const std::size_t m = instance.has_potential() ? instance.decisions().size() : 0;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  Eigen::VectorXd z(static_cast<Eigen::Index>(n)), y(static_cast<Eigen::Index>(n));
  Eigen::MatrixXd potential(static_cast<Eigen::Index>(m ? n : 0), static_cast<Eigen::Index>(m));

  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform() * acc;
    auto pick = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    pick = std::min(pick, rows.size() - 1);
    while (rows[pick].probability == Rational(0) && pick > 0)
      --pick;
    const auto& row = rows[pick];
    const auto at = static_cast<Eigen::Index>(i);
    z(at) = row.z.to_double();
    y(at) = row.y.to_double();
    for (std::size_t c = 0; c < k; ++c)
      x(at, static_cast<Eigen::Index>(c)) = row.x[c].to_double();
    for (std::size_t d = 0; d < m; ++d)
      potential(at, static_cast<Eigen::Index>(d)) = row.potential[d].to_double();
  }
  return { ObservationalDataset(std::move(x), std::move(z), std::move(y)), std::move(potential) };
}

} // namespace obsopt
