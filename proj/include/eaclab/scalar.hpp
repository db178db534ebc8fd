#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

namespace eaclab {

// Arbitrary-precision binary float (variable precision, set globally per thread)
// and exact rational. Expression templates are off so both types compose with
// Eigen and behave like plain value types.
using BigFloat =
    boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>,
                                  boost::multiprecision::et_off>;
using Rational =
    boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                  boost::multiprecision::et_off>;
using BigInt = boost::multiprecision::number<boost::multiprecision::gmp_int,
                                             boost::multiprecision::et_off>;

// Sets the working BigFloat precision to at least `bits` mantissa bits for the
// calling thread. Newly constructed BigFloat values pick this up.
void set_bigfloat_bits(unsigned bits);
unsigned bigfloat_bits();

constexpr unsigned kDefaultMantissaBits = 256;

struct NumericMode {
  enum class Kind { Float64, BigFloat, Rational };
  Kind kind = Kind::Float64;
  unsigned mantissa_bits = kDefaultMantissaBits;

  static NumericMode f64() { return {Kind::Float64, 0}; }
  static NumericMode bigfloat(unsigned bits = kDefaultMantissaBits) {
    return {Kind::BigFloat, bits};
  }
  static NumericMode rational() { return {Kind::Rational, 0}; }

  // "f64" | "bigfloat[:bits]" | "rational"
  static NumericMode parse(std::string_view text);
  std::string str() const;
};

// Decimal literals. Grammar: [+-]digits[.digits][(e|E)[+-]digits].
bool is_decimal_literal(std::string_view text);
Rational rational_from_decimal(std::string_view text);  // exact
BigFloat bigfloat_from_decimal(std::string_view text);  // current precision
double double_from_decimal(std::string_view text);

// Exact decimal renderings. A dyadic rational always has one; a general
// rational has one iff its reduced denominator is of the form 2^a 5^b.
bool has_finite_decimal(const Rational& v);
std::string exact_decimal(const Rational& v);  // throws if not finite-decimal
std::string exact_decimal(const BigFloat& v);
std::string exact_decimal(double v);
std::string shortest_decimal(double v);  // round-trips bit-exactly

Rational to_rational(const BigFloat& v);  // exact
Rational to_rational(double v);           // exact
BigFloat to_bigfloat(const Rational& v);  // rounded to current precision
BigFloat to_bigfloat(double v) noexcept;

template <class S>
struct ScalarOps;

template <>
struct ScalarOps<double> {
  static constexpr bool has_exp_ln = true;
  static const char* name() { return "f64"; }
  static double from_decimal(std::string_view t) { return double_from_decimal(t); }
  static std::string to_text(double v) { return shortest_decimal(v); }
  static double exp(double v) { return std::exp(v); }
  static double ln(double v) { return std::log(v); }
  static bool is_finite(double v) { return std::isfinite(v); }
  static double from_double(double v) { return v; }
  static double abs(double v) { return std::fabs(v); }
};

template <>
struct ScalarOps<BigFloat> {
  static constexpr bool has_exp_ln = true;
  static const char* name() { return "bigfloat"; }
  static BigFloat from_decimal(std::string_view t) { return bigfloat_from_decimal(t); }
  static std::string to_text(const BigFloat& v);
  static BigFloat exp(const BigFloat& v) { return boost::multiprecision::exp(v); }
  static BigFloat ln(const BigFloat& v) { return boost::multiprecision::log(v); }
  static bool is_finite(const BigFloat& v) {
    return mpfr_number_p(v.backend().data()) != 0;
  }
  static BigFloat from_double(double v) { return to_bigfloat(v); }
  static BigFloat abs(const BigFloat& v) { return boost::multiprecision::abs(v); }
};

template <>
struct ScalarOps<Rational> {
  static constexpr bool has_exp_ln = false;
  static const char* name() { return "rational"; }
  static Rational from_decimal(std::string_view t) { return rational_from_decimal(t); }
  static std::string to_text(const Rational& v);
  static bool is_finite(const Rational&) { return true; }
  static Rational from_double(double v) { return to_rational(v); }
  static Rational abs(const Rational& v) { return boost::multiprecision::abs(v); }
};

}  // namespace eaclab
