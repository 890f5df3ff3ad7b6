#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace obsopt {

//! Mixes a master seed with a list of stream identifiers (splitmix64 finalizer
//! applied per component). Used so that every replication / bootstrap draw owns
//! a generator that does not depend on scheduling.
std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> stream);

//! Random source with a fully specified algorithm ("mt19937_64/box-muller v1").
//!
//! The standard library's distributions are implementation-defined, so the
//! uniform, index and normal transforms are written out here to keep datasets
//! reproducible across standard library vendors.
class Rng
{
public:
  static constexpr const char* algorithm = "mt19937_64/box-muller v1";

  explicit Rng(std::uint64_t seed)
    : engine_(seed)
  {}

  std::uint64_t bits() { return engine_(); }

  //! Uniform on [0, 1) with 53 random bits.
  double uniform();

  //! Uniform integer in [0, bound) via rejection (no modulo bias).
  std::uint64_t index(std::uint64_t bound);

  //! Standard normal via the Box-Muller transform; the second variate of each
  //! pair is cached.
  double normal();

  double normal(double mean, double sd) { return mean + sd * normal(); }

private:
  std::mt19937_64 engine_;
  double cached_{ 0.0 };
  bool has_cached_{ false };
};

} // namespace obsopt
