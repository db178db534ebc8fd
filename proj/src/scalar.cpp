#include "eaclab/scalar.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>

namespace eaclab {

namespace {

thread_local unsigned g_bits = kDefaultMantissaBits;
thread_local bool g_bits_applied = false;

void apply_bits(unsigned bits) {
  // Boost exposes precision in decimal digits; round up so the underlying
  // mpfr precision is at least `bits`.
  unsigned digits10 = static_cast<unsigned>((static_cast<uint64_t>(bits) * 30103 + 99999) / 100000) + 2;
  BigFloat::default_precision(digits10);
}

void ensure_bits() {
  if (!g_bits_applied) {
    apply_bits(g_bits);
    g_bits_applied = true;
  }
}

}  // namespace

void set_bigfloat_bits(unsigned bits) {
  if (bits < 24) throw std::invalid_argument("BigFloat mantissa must be >= 24 bits");
  g_bits = bits;
  apply_bits(bits);
  g_bits_applied = true;
}

unsigned bigfloat_bits() { return g_bits; }

NumericMode NumericMode::parse(std::string_view text) {
  if (text == "f64" || text == "float64") return f64();
  if (text == "rational" || text == "exact") return rational();
  if (text == "bigfloat") return bigfloat();
  constexpr std::string_view prefix = "bigfloat:";
  if (text.substr(0, prefix.size()) == prefix) {
    unsigned bits = 0;
    auto rest = text.substr(prefix.size());
    auto [p, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), bits);
    if (ec == std::errc() && p == rest.data() + rest.size() && bits >= 24)
      return bigfloat(bits);
  }
  throw std::invalid_argument("bad numeric mode: " + std::string(text));
}

std::string NumericMode::str() const {
  switch (kind) {
    case Kind::Float64: return "f64";
    case Kind::BigFloat: return "bigfloat:" + std::to_string(mantissa_bits);
    case Kind::Rational: return "rational";
  }
  return "?";
}

bool is_decimal_literal(std::string_view t) {
  size_t i = 0;
  if (i < t.size() && (t[i] == '+' || t[i] == '-')) ++i;
  size_t digits = 0;
  while (i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]))) ++i, ++digits;
  if (i < t.size() && t[i] == '.') {
    ++i;
    while (i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]))) ++i, ++digits;
  }
  if (digits == 0) return false;
  if (i < t.size() && (t[i] == 'e' || t[i] == 'E')) {
    ++i;
    if (i < t.size() && (t[i] == '+' || t[i] == '-')) ++i;
    size_t ed = 0;
    while (i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]))) ++i, ++ed;
    if (ed == 0) return false;
  }
  return i == t.size();
}

Rational rational_from_decimal(std::string_view t) {
  if (!is_decimal_literal(t))
    throw std::invalid_argument("bad decimal literal: " + std::string(t));
  bool neg = false;
  size_t i = 0;
  if (t[i] == '+' || t[i] == '-') neg = (t[i] == '-'), ++i;
  std::string digits;
  long frac_len = 0;
  for (; i < t.size() && std::isdigit(static_cast<unsigned char>(t[i])); ++i)
    digits += t[i];
  if (i < t.size() && t[i] == '.') {
    for (++i; i < t.size() && std::isdigit(static_cast<unsigned char>(t[i])); ++i) {
      digits += t[i];
      ++frac_len;
    }
  }
  long expo = 0;
  if (i < t.size() && (t[i] == 'e' || t[i] == 'E')) {
    expo = std::strtol(std::string(t.substr(i + 1)).c_str(), nullptr, 10);
  }
  // Strip leading zeros: a bare leading 0 would switch the big-int string
  // parser into octal.
  size_t nz = digits.find_first_not_of('0');
  digits = (nz == std::string::npos) ? "0" : digits.substr(nz);
  BigInt num(digits);
  if (neg) num = -num;
  long ten_pow = expo - frac_len;
  Rational r(num);
  if (ten_pow > 0) {
    BigInt scale = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(ten_pow));
    r *= Rational(scale);
  } else if (ten_pow < 0) {
    BigInt scale = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(-ten_pow));
    r /= Rational(scale);
  }
  return r;
}

BigFloat bigfloat_from_decimal(std::string_view t) {
  ensure_bits();
  if (!is_decimal_literal(t))
    throw std::invalid_argument("bad decimal literal: " + std::string(t));
  return BigFloat(std::string(t));
}

double double_from_decimal(std::string_view t) {
  if (!is_decimal_literal(t))
    throw std::invalid_argument("bad decimal literal: " + std::string(t));
  return std::strtod(std::string(t).c_str(), nullptr);
}

bool has_finite_decimal(const Rational& v) {
  BigInt den = boost::multiprecision::denominator(v);
  while (den % 2 == 0) den /= 2;
  while (den % 5 == 0) den /= 5;
  return den == 1;
}

std::string exact_decimal(const Rational& v) {
  BigInt num = boost::multiprecision::numerator(v);
  BigInt den = boost::multiprecision::denominator(v);
  unsigned two = 0, five = 0;
  BigInt d = den;
  while (d % 2 == 0) d /= 2, ++two;
  while (d % 5 == 0) d /= 5, ++five;
  if (d != 1)
    throw std::invalid_argument("rational has no finite decimal representation");
  unsigned shift = std::max(two, five);
  // num/den * 10^shift is an integer; shift is the number of fraction digits.
  BigInt scaled = num * boost::multiprecision::pow(BigInt(10), shift) / den;
  bool neg = scaled < 0;
  std::string body = boost::multiprecision::abs(scaled).str();
  std::string out;
  if (shift == 0) {
    out = body;
  } else {
    if (body.size() <= shift) body.insert(0, shift + 1 - body.size(), '0');
    out = body.substr(0, body.size() - shift) + "." + body.substr(body.size() - shift);
    // trim trailing zeros in the fraction
    size_t last = out.find_last_not_of('0');
    if (out[last] == '.') --last;
    out.erase(last + 1);
  }
  if (neg && out != "0") out.insert(0, 1, '-');
  return out;
}

std::string exact_decimal(const BigFloat& v) { return exact_decimal(to_rational(v)); }

std::string exact_decimal(double v) {
  if (!std::isfinite(v)) throw std::invalid_argument("non-finite double");
  return exact_decimal(to_rational(v));
}

std::string shortest_decimal(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, p);
}

Rational to_rational(const BigFloat& v) {
  if (v == 0) return Rational(0);
  if (!ScalarOps<BigFloat>::is_finite(v))
    throw std::invalid_argument("non-finite BigFloat");
  mpz_t z;
  mpz_init(z);
  mpfr_exp_t e = mpfr_get_z_2exp(z, v.backend().data());
  BigInt mant(z);
  mpz_clear(z);
  Rational r(mant);
  if (e > 0) {
    r *= Rational(boost::multiprecision::pow(BigInt(2), static_cast<unsigned>(e)));
  } else if (e < 0) {
    r /= Rational(boost::multiprecision::pow(BigInt(2), static_cast<unsigned>(-e)));
  }
  return r;
}

Rational to_rational(double v) {
  if (!std::isfinite(v)) throw std::invalid_argument("non-finite double");
  return to_rational(to_bigfloat(v));
}

BigFloat to_bigfloat(const Rational& v) {
  ensure_bits();
  BigFloat num(boost::multiprecision::numerator(v));
  BigFloat den(boost::multiprecision::denominator(v));
  return num / den;
}

BigFloat to_bigfloat(double v) noexcept {
  ensure_bits();
  return BigFloat(v);
}

std::string ScalarOps<BigFloat>::to_text(const BigFloat& v) {
  return v.str(0, std::ios_base::scientific);
}

std::string ScalarOps<Rational>::to_text(const Rational& v) {
  return v.str();
}

}  // namespace eaclab
