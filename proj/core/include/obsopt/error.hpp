#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace obsopt {

//! Raised when data or a numerical routine cannot produce a result
//! (malformed input files, singular fits, empty kernel neighborhoods).
//! Precondition violations on arguments use std::invalid_argument instead.
class DataError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

//! All kernel weights vanished for a Nadaraya-Watson query.
class EmptyNeighborhoodError : public DataError
{
public:
  EmptyNeighborhoodError(const std::string& what, std::size_t index)
    : DataError(what)
    , index_(index)
  {}

  //! Row index (or query index) whose neighborhood was empty.
  std::size_t index() const { return index_; }

private:
  std::size_t index_;
};

class RankDeficiencyError : public DataError
{
public:
  RankDeficiencyError(const std::string& what, std::size_t column)
    : DataError(what)
    , column_(column)
  {}

  //! First design column that is (numerically) a combination of earlier ones.
  std::size_t column() const { return column_; }

private:
  std::size_t column_;
};

class SeparationError : public DataError
{
public:
  using DataError::DataError;
};

} // namespace obsopt
