#pragma once

#include "obsopt/core.hpp"
#include "obsopt/rational.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace obsopt {

//! One support point of a finite joint law.
struct DiscreteRow
{
  Rational z;
  //! Observed outcome Y = Y(z).
  Rational y;
  //! Potential outcomes Y(d) for every d in DiscreteInstance::decisions, or
  //! empty when only the observed pair is known.
  std::vector<Rational> potential;
  std::vector<Rational> x;
  Rational probability;
};

//! Finite law of (X, Z, Y) and optionally of the full potential-outcome
//! vector.
class DiscreteInstance
{
public:
  //! Checks non-negative probabilities summing to 1 within 1e-12 (or divides
  //! by the total when `normalize` is set) and consistent row shapes. With
  //! potential outcomes, each row's observed outcome is set to the potential
  //! outcome at its z.
  static DiscreteInstance make(std::vector<Rational> decisions,
                               std::vector<DiscreteRow> rows,
                               bool normalize = false);

  //! Decision values, ascending. With potential outcomes these index
  //! DiscreteRow::potential; otherwise they are the distinct observed z.
  const std::vector<Rational>& decisions() const { return decisions_; }
  const std::vector<DiscreteRow>& rows() const { return rows_; }
  bool has_potential() const { return has_potential_; }
  std::size_t covariates() const { return rows_.front().x.size(); }

private:
  std::vector<Rational> decisions_;
  std::vector<DiscreteRow> rows_;
  bool has_potential_ = false;
};

//! Built-in tables: "intro" (six equally likely days), "table2a" (observed
//! price/demand law), "alice" and "bob" (two potential-outcome models
//! consistent with table2a), "example2" (table2a refined by a binary
//! covariate). Throws std::invalid_argument for other names.
DiscreteInstance builtin_discrete_instance(const std::string& name);

//! CSV with header z, then either y or one y(<d>) column per decision d,
//! then p (or probability), then optional x1..xk. Cells are fractions "a/b"
//! or decimals. Errors name the line.
DiscreteInstance read_discrete_csv(std::istream& in, bool normalize = false);
DiscreteInstance read_discrete_csv(const std::string& path, bool normalize = false);

struct DiscreteExpectation
{
  Rational z;
  std::optional<Rational> mean_response;  //!< y(z) = E[Y(z)]
  std::optional<Rational> predictive;     //!< E[Y | Z = z], if P(Z = z) > 0
  std::optional<Rational> reward;         //!< r(z) y(z)
  std::optional<Rational> predictive_reward;
  std::optional<Rational> confounding;    //!< E[Y(z) - y(z) | Z = z]
};

//! Exact expectations at every decision of the instance. The cost of a
//! margin reward is read back from its shortest decimal form.
std::vector<DiscreteExpectation> discrete_expectations(const DiscreteInstance& instance,
                                                       const RewardSpec& reward);

struct DiscreteSample
{
  ObservationalDataset data;
  //! n x m potential outcomes, empty unless the instance carries them.
  Eigen::MatrixXd potential;
};

//! n iid draws from the law by inverse-CDF sampling over the rows.
DiscreteSample gen_discrete(const DiscreteInstance& instance,
                            std::size_t n,
                            std::uint64_t seed);

} // namespace obsopt
