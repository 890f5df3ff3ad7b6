#include "obsopt/core.hpp"
#include "obsopt/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace obsopt {

namespace {

void require_finite(const Eigen::Ref<const Eigen::MatrixXd>& m, const char* name)
{
  if (!m.allFinite())
    throw std::invalid_argument(std::string("dataset column ") + name +
                                " contains non-finite values");
}

std::vector<std::string> split(const std::string& line, char sep)
{
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep))
    out.push_back(cell);
  if (!line.empty() && line.back() == sep)
    out.emplace_back();
  return out;
}

std::string trim(const std::string& s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

} // namespace

// -- ObservationalDataset ---------------------------------------------------

ObservationalDataset::ObservationalDataset(Eigen::MatrixXd x,
                                           Eigen::VectorXd z,
                                           Eigen::VectorXd y)
  : x_(std::move(x))
  , z_(std::move(z))
  , y_(std::move(y))
{
  if (z_.size() < 1)
    throw std::invalid_argument("dataset needs at least one record");
  if (y_.size() != z_.size() || x_.rows() != z_.size())
    throw std::invalid_argument("dataset columns have different lengths");
  require_finite(x_, "x");
  require_finite(z_, "z");
  require_finite(y_, "y");
}

ObservationalDataset ObservationalDataset::without_covariates(Eigen::VectorXd z,
                                                              Eigen::VectorXd y)
{
  Eigen::MatrixXd x(z.size(), 0);
  return ObservationalDataset(std::move(x), std::move(z), std::move(y));
}

ObservationalDataset ObservationalDataset::rows(
  std::span<const std::size_t> index) const
{
  const auto m = static_cast<Eigen::Index>(index.size());
  Eigen::MatrixXd x(m, x_.cols());
  Eigen::VectorXd z(m), y(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const auto i = static_cast<Eigen::Index>(index[static_cast<std::size_t>(r)]);
    if (i >= z_.size())
      throw std::out_of_range("row index out of range");
    x.row(r) = x_.row(i);
    z(r) = z_(i);
    y(r) = y_(i);
  }
  return ObservationalDataset(std::move(x), std::move(z), std::move(y));
}

ObservationalDataset ObservationalDataset::decisions_only() const
{
  return without_covariates(z_, y_);
}

// -- RewardSpec ---------------------------------------------------------------

RewardSpec RewardSpec::margin(double cost)
{
  if (!std::isfinite(cost))
    throw std::invalid_argument("margin reward needs a finite cost");
  return RewardSpec(Form::margin, cost);
}

RewardSpec RewardSpec::parse(const std::string& text)
{
  if (text == "unit")
    return unit();
  if (text.rfind("margin:", 0) == 0)
    return margin(parse_setting(text.substr(7), "reward cost"));
  throw std::invalid_argument("reward must be 'unit' or 'margin:<c>', got '" +
                              text + "'");
}

std::string RewardSpec::str() const
{
  return form_ == Form::unit ? "unit" : "margin:" + format_number(cost_);
}

// -- DecisionSpace ------------------------------------------------------------

DecisionSpace DecisionSpace::interval(double lo, double hi, std::size_t points)
{
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
    throw std::invalid_argument("decision interval needs finite lo < hi");
  if (points < 2)
    throw std::invalid_argument("decision grid needs at least 2 points");
  std::vector<double> grid(points);
  const double span = hi - lo;
  const double last = static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i)
    grid[i] = lo + span * static_cast<double>(i) / last;
  grid.back() = hi;
  return DecisionSpace(std::move(grid), true);
}

DecisionSpace DecisionSpace::enumerated(std::vector<double> values)
{
  if (values.empty())
    throw std::invalid_argument("enumerated decision space is empty");
  for (double v : values)
    if (!std::isfinite(v))
      throw std::invalid_argument("decision values must be finite");
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return DecisionSpace(std::move(values), false);
}

DecisionSpace DecisionSpace::parse(const std::string& text)
{
  const auto parts = split(text, ',');
  if (parts.size() != 3)
    throw std::invalid_argument("space must be 'lo,hi,points', got '" + text +
                                "'");
  const double lo = parse_setting(parts[0], "space lo");
  const double hi = parse_setting(parts[1], "space hi");
  const double pts = parse_setting(parts[2], "space points");
  if (pts < 2 || pts != std::floor(pts) || pts > 1e8)
    throw std::invalid_argument("space points must be an integer >= 2");
  return interval(lo, hi, static_cast<std::size_t>(pts));
}

bool DecisionSpace::contains(double z) const
{
  if (interval_)
    return z >= lo() && z <= hi();
  return std::binary_search(grid_.begin(), grid_.end(), z);
}

double DecisionSpace::nearest(double z) const
{
  auto it = std::lower_bound(grid_.begin(), grid_.end(), z);
  if (it == grid_.begin())
    return grid_.front();
  if (it == grid_.end())
    return grid_.back();
  const double above = *it;
  const double below = *(it - 1);
  return (z - below <= above - z) ? below : above;
}

std::string DecisionSpace::str() const
{
  if (interval_)
    return format_number(lo()) + "," + format_number(hi()) + "," +
           std::to_string(grid_.size());
  std::string out = "{";
  for (std::size_t i = 0; i < grid_.size(); ++i)
    out += (i ? "," : "") + format_number(grid_[i]);
  return out + "}";
}

// -- optimization -------------------------------------------------------------

Optimum optimize_on_grid(std::span<const double> values,
                         const DecisionSpace& space)
{
  const auto& grid = space.grid();
  if (values.size() != grid.size())
    throw std::invalid_argument("curve values do not match the grid");
  std::size_t best = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]))
      throw DataError("curve is not finite at grid node z = " +
                      format_number(grid[i]));
    if (values[i] > values[best])
      best = i;
  }
  return { grid[best], values[best] };
}

Optimum optimize_scalar_curve(const std::function<double(double)>& curve,
                              const DecisionSpace& space,
                              bool refine)
{
  const auto& grid = space.grid();
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    values[i] = curve(grid[i]);
  Optimum best = optimize_on_grid(values, space);
  if (!refine || !space.is_interval())
    return best;

  const auto it = std::lower_bound(grid.begin(), grid.end(), best.z);
  const auto idx = static_cast<std::size_t>(it - grid.begin());
  double a = grid[idx == 0 ? 0 : idx - 1];
  double b = grid[idx + 1 == grid.size() ? idx : idx + 1];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = curve(c), fd = curve(d);
  for (int iter = 0; iter < 80 && (b - a) > 1e-12 * (1.0 + std::abs(a)); ++iter) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = curve(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = curve(d);
    }
  }
  const double zr = fc >= fd ? c : d;
  const double fr = fc >= fd ? fc : fd;
  if (std::isfinite(fr) && fr > best.value)
    best = { zr, fr };
  return best;
}

// -- oracle -------------------------------------------------------------------

double true_reward(const ResponseOracle& oracle, const RewardSpec& reward, double z)
{
  return reward(z) * oracle.mean_response(z);
}

double predictive_reward(const ResponseOracle& oracle,
                         const RewardSpec& reward,
                         double z)
{
  return reward(z) * oracle.predictive_response(z);
}

// -- text I/O -----------------------------------------------------------------

std::string format_number(double value)
{
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_number(const std::string& text, const std::string& context)
{
  const std::string t = trim(text);
  double value = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size() ||
      !std::isfinite(value))
    throw DataError(context + ": '" + text + "' is not a finite number");
  return value;
}

double parse_setting(const std::string& text, const std::string& context)
{
  try {
    return parse_number(text, context);
  } catch (const DataError& e) {
    throw std::invalid_argument(e.what());
  }
}

ObservationalDataset read_dataset_csv(std::istream& in)
{
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line))
    throw DataError("dataset CSV is empty (line 1: missing header)");
  ++line_no;
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
    line.erase(0, 3);
  const auto header = split(trim(line), ',');

  int z_col = -1, y_col = -1;
  std::vector<int> x_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string name = trim(header[c]);
    if (name == "z") {
      z_col = static_cast<int>(c);
    } else if (name == "y") {
      y_col = static_cast<int>(c);
    } else if (name.size() > 1 && name[0] == 'x' &&
               name.find_first_not_of("0123456789", 1) == std::string::npos &&
               std::stoul(name.substr(1)) == x_cols.size() + 1) {
      x_cols.push_back(static_cast<int>(c));
    } else {
      throw DataError("line 1: unexpected column '" + name +
                      "' (expected z, y, x1..xk in order)");
    }
  }
  if (z_col < 0)
    throw DataError("line 1: missing column 'z'");
  if (y_col < 0)
    throw DataError("line 1: missing column 'y'");

  std::vector<double> zs, ys, xs;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty())
      continue;
    const auto cells = split(t, ',');
    const std::string where = "line " + std::to_string(line_no);
    if (cells.size() != header.size())
      throw DataError(where + ": expected " + std::to_string(header.size()) +
                      " fields, found " + std::to_string(cells.size()));
    zs.push_back(parse_number(cells[static_cast<std::size_t>(z_col)], where));
    ys.push_back(parse_number(cells[static_cast<std::size_t>(y_col)], where));
    for (int c : x_cols)
      xs.push_back(parse_number(cells[static_cast<std::size_t>(c)], where));
  }
  if (zs.empty())
    throw DataError("dataset CSV has a header but no records");

  const auto n = static_cast<Eigen::Index>(zs.size());
  const auto k = static_cast<Eigen::Index>(x_cols.size());
  Eigen::MatrixXd x(n, k);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index c = 0; c < k; ++c)
      x(i, c) = xs[static_cast<std::size_t>(i * k + c)];
  return ObservationalDataset(std::move(x),
                              Eigen::Map<Eigen::VectorXd>(zs.data(), n),
                              Eigen::Map<Eigen::VectorXd>(ys.data(), n));
}

ObservationalDataset read_dataset_csv(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw DataError("cannot open dataset '" + path + "'");
  return read_dataset_csv(in);
}

void write_dataset_csv(std::ostream& out, const ObservationalDataset& data)
{
  out << "z,y";
  for (std::size_t c = 0; c < data.covariates(); ++c)
    out << ",x" << (c + 1);
  out << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out << format_number(data.z()(r)) << ',' << format_number(data.y()(r));
    for (Eigen::Index c = 0; c < data.x().cols(); ++c)
      out << ',' << format_number(data.x()(r, c));
    out << '\n';
  }
}

} // namespace obsopt
