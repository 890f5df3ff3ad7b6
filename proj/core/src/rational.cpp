#include "obsopt/rational.hpp"
#include "obsopt/core.hpp"
#include "obsopt/error.hpp"

#include <limits>
#include <ostream>
#include <stdexcept>

namespace obsopt {

namespace {

__int128 gcd128(__int128 a, __int128 b)
{
  if (a < 0)
    a = -a;
  if (b < 0)
    b = -b;
  while (b != 0) {
    const __int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

bool fits(__int128 v)
{
  return v >= std::numeric_limits<std::int64_t>::min() &&
         v <= std::numeric_limits<std::int64_t>::max();
}

} // namespace

Rational Rational::reduce(__int128 num, __int128 den)
{
  if (den == 0)
    throw DataError("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const __int128 g = gcd128(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  if (!fits(num) || !fits(den))
    throw DataError("rational arithmetic overflow");
  Rational r;
  r.num_ = static_cast<std::int64_t>(num);
  r.den_ = static_cast<std::int64_t>(den);
  return r;
}

Rational::Rational(std::int64_t num, std::int64_t den)
{
  *this = reduce(num, den);
}

Rational Rational::parse(const std::string& text)
{
  auto integer = [&](const std::string& s) {
    if (s.empty())
      throw DataError("malformed fraction '" + text + "'");
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(s, &pos);
    } catch (const std::exception&) {
      throw DataError("malformed fraction '" + text + "'");
    }
    if (pos != s.size())
      throw DataError("malformed fraction '" + text + "'");
    return static_cast<std::int64_t>(v);
  };

  const auto slash = text.find('/');
  if (slash != std::string::npos)
    return Rational(integer(text.substr(0, slash)), integer(text.substr(slash + 1)));

  const auto dot = text.find('.');
  if (dot == std::string::npos)
    return Rational(integer(text));
  std::string digits = text.substr(0, dot) + text.substr(dot + 1);
  const auto places = text.size() - dot - 1;
  if (places > 18 || text.find_first_of("eE") != std::string::npos)
    throw DataError("decimal '" + text + "' cannot be read exactly");
  std::int64_t scale = 1;
  for (std::size_t i = 0; i < places; ++i)
    scale *= 10;
  if (digits == "-" || digits == "+" || digits.empty())
    throw DataError("malformed decimal '" + text + "'");
  return Rational(integer(digits), scale);
}

Rational Rational::from_double(double value)
{
  std::string text = format_number(value);
  const auto e = text.find_first_of("eE");
  if (e == std::string::npos)
    return parse(text);
  // shortest form used an exponent: shift the decimal mantissa by hand
  const int exponent = std::stoi(text.substr(e + 1));
  Rational r = parse(text.substr(0, e));
  const Rational ten(10);
  for (int i = 0; i < std::abs(exponent); ++i)
    r = exponent > 0 ? r * ten : r / ten;
  return r;
}

std::string Rational::str() const
{
  return den_ == 1 ? std::to_string(num_)
                   : std::to_string(num_) + "/" + std::to_string(den_);
}

Rational Rational::operator-() const
{
  return reduce(-static_cast<__int128>(num_), den_);
}

Rational operator+(const Rational& a, const Rational& b)
{
  return Rational::reduce(static_cast<__int128>(a.num_) * b.den_ +
                            static_cast<__int128>(b.num_) * a.den_,
                          static_cast<__int128>(a.den_) * b.den_);
}

Rational operator-(const Rational& a, const Rational& b)
{
  return a + (-b);
}

Rational operator*(const Rational& a, const Rational& b)
{
  return Rational::reduce(static_cast<__int128>(a.num_) * b.num_,
                          static_cast<__int128>(a.den_) * b.den_);
}

Rational operator/(const Rational& a, const Rational& b)
{
  if (b.num_ == 0)
    throw DataError("rational division by zero");
  return Rational::reduce(static_cast<__int128>(a.num_) * b.den_,
                          static_cast<__int128>(a.den_) * b.num_);
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b)
{
  const __int128 l = static_cast<__int128>(a.num_) * b.den_;
  const __int128 r = static_cast<__int128>(b.num_) * a.den_;
  return l <=> r;
}

std::ostream& operator<<(std::ostream& out, const Rational& r)
{
  return out << r.str();
}

} // namespace obsopt
