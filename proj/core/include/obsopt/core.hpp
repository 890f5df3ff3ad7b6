#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace obsopt {

//! Historical records (covariates x, decision z, outcome y).
//!
//! x is n-by-k and k may be 0. All entries are finite and n >= 1; the
//! constructor enforces both.
class ObservationalDataset
{
public:
  ObservationalDataset(Eigen::MatrixXd x, Eigen::VectorXd z, Eigen::VectorXd y);

  //! Dataset with k = 0 covariate columns.
  static ObservationalDataset without_covariates(Eigen::VectorXd z,
                                                 Eigen::VectorXd y);

  std::size_t size() const { return static_cast<std::size_t>(z_.size()); }
  std::size_t covariates() const { return static_cast<std::size_t>(x_.cols()); }

  const Eigen::MatrixXd& x() const { return x_; }
  const Eigen::VectorXd& z() const { return z_; }
  const Eigen::VectorXd& y() const { return y_; }

  //! New dataset made of the given rows (repeats allowed).
  ObservationalDataset rows(std::span<const std::size_t> index) const;

  //! Same records with the covariates dropped.
  ObservationalDataset decisions_only() const;

private:
  Eigen::MatrixXd x_;
  Eigen::VectorXd z_;
  Eigen::VectorXd y_;
};

//! Certain part r(z) of the reward: r(z) = z - c (margin) or r(z) = 1 (unit).
class RewardSpec
{
public:
  enum class Form
  {
    margin,
    unit
  };

  static RewardSpec margin(double cost);
  static RewardSpec unit() { return RewardSpec(Form::unit, 0.0); }

  //! Parses "margin:<c>" or "unit".
  static RewardSpec parse(const std::string& text);

  double operator()(double z) const
  {
    return form_ == Form::margin ? z - cost_ : 1.0;
  }

  Form form() const { return form_; }
  double cost() const { return cost_; }
  std::string str() const;

private:
  RewardSpec(Form form, double cost)
    : form_(form)
    , cost_(cost)
  {}

  Form form_;
  double cost_;
};

//! Feasible decisions: a compact interval discretized into a uniform grid
//! (endpoints included), or an explicit finite list of decisions.
class DecisionSpace
{
public:
  static DecisionSpace interval(double lo, double hi, std::size_t points);
  static DecisionSpace enumerated(std::vector<double> values);

  //! Parses "lo,hi,points".
  static DecisionSpace parse(const std::string& text);

  double lo() const { return grid_.front(); }
  double hi() const { return grid_.back(); }
  std::size_t size() const { return grid_.size(); }
  const std::vector<double>& grid() const { return grid_; }
  bool is_interval() const { return interval_; }

  bool contains(double z) const;

  //! Grid node closest to z (smaller node on ties).
  double nearest(double z) const;

  std::string str() const;

private:
  DecisionSpace(std::vector<double> grid, bool interval)
    : grid_(std::move(grid))
    , interval_(interval)
  {}

  std::vector<double> grid_;
  bool interval_;
};

struct Optimum
{
  double z;
  double value;
};

//! Maximizes curve over the grid of space; ties go to the smallest z.
//!
//! With refine set and an interval space, a golden-section search is run in
//! the bracket around the best node and its result replaces the node only if
//! it is strictly better. Throws DataError if the curve is not finite at a
//! node.
Optimum optimize_scalar_curve(const std::function<double(double)>& curve,
                              const DecisionSpace& space,
                              bool refine = false);

//! Same selection rule applied to values already evaluated on space.grid().
Optimum optimize_on_grid(std::span<const double> values,
                         const DecisionSpace& space);

//! Ground truth for synthetic instances: y(z) = E[Y(z)], the predictive
//! curve E[Y | Z = z], and a seeded sampler of observational data.
struct ResponseOracle
{
  std::function<double(double)> mean_response;
  std::function<double(double)> predictive_response;
  std::function<ObservationalDataset(std::size_t n, std::uint64_t seed)> sampler;
};

//! R(z) = r(z) y(z).
double true_reward(const ResponseOracle& oracle,
                   const RewardSpec& reward,
                   double z);

//! R~(z) = r(z) E[Y | Z = z].
double predictive_reward(const ResponseOracle& oracle,
                         const RewardSpec& reward,
                         double z);

// -- text I/O -------------------------------------------------------------

//! Shortest decimal text that round-trips to the same double.
std::string format_number(double value);

//! Parses a finite decimal number; throws DataError naming `context`.
double parse_number(const std::string& text, const std::string& context);

//! parse_number for configuration text: throws std::invalid_argument.
double parse_setting(const std::string& text, const std::string& context);

//! Reads the dataset CSV format: header row with columns z, y and then
//! optional x1..xk. Errors name the offending line.
ObservationalDataset read_dataset_csv(std::istream& in);
ObservationalDataset read_dataset_csv(const std::string& path);

void write_dataset_csv(std::ostream& out, const ObservationalDataset& data);

} // namespace obsopt
