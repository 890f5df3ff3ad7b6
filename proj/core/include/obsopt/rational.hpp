#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <string>

namespace obsopt {

//! Exact fraction num/den with den > 0 and gcd(num, den) = 1.
//!
//! Arithmetic runs in 128-bit intermediates and throws DataError if a reduced
//! result does not fit in 64 bits.
class Rational
{
public:
  constexpr Rational() = default;
  Rational(std::int64_t num, std::int64_t den = 1);

  //! Parses "a/b", an integer, or a plain decimal such as "0.125" or "-3.5".
  static Rational parse(const std::string& text);

  //! The decimal value printed by format_number, read back exactly; 0.02
  //! becomes 1/50 rather than the binary expansion of the double.
  static Rational from_double(double value);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  std::string str() const;

  Rational operator-() const;
  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  Rational& operator+=(const Rational& b) { return *this = *this + b; }
  Rational& operator-=(const Rational& b) { return *this = *this - b; }
  Rational& operator*=(const Rational& b) { return *this = *this * b; }

  friend bool operator==(const Rational& a, const Rational& b) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

private:
  static Rational reduce(__int128 num, __int128 den);

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

std::ostream& operator<<(std::ostream& out, const Rational& r);

} // namespace obsopt
