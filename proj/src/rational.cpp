#include "arith/rational.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>

#include "arith/errors.hpp"

namespace arith {

namespace {

Integer pow10(unsigned e) {
  Integer r = 1;
  for (unsigned i = 0; i < e; ++i) r *= 10;
  return r;
}

[[noreturn]] void bad(std::string_view text) {
  throw InputError("not a rational number: '" + std::string(text) + "'");
}

Rational parse_decimal(std::string_view text) {
  std::size_t i = 0;
  bool negative = false;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
    negative = text[i] == '-';
    ++i;
  }
  std::string digits;
  long scale = 0;
  bool any = false;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
    digits += text[i++];
    any = true;
  }
  if (i < text.size() && text[i] == '.') {
    ++i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
      digits += text[i++];
      --scale;
      any = true;
    }
  }
  if (!any) bad(text);
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    long exponent = 0;
    auto [ptr, ec] = std::from_chars(text.data() + i, text.data() + text.size(), exponent);
    if (ec != std::errc() || ptr == text.data() + i) bad(text);
    i = static_cast<std::size_t>(ptr - text.data());
    scale += exponent;
  }
  if (i != text.size()) bad(text);
  // A leading zero would make the integer parser read octal.
  digits.erase(0, std::min(digits.find_first_not_of('0'), digits.size()));
  Integer mantissa(digits.empty() ? std::string("0") : digits);
  if (negative) mantissa = -mantissa;
  if (scale >= 0) return Rational(mantissa * pow10(static_cast<unsigned>(scale)));
  return Rational(mantissa, pow10(static_cast<unsigned>(-scale)));
}

}  // namespace

Rational parse_rational(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (text.empty()) bad(text);
  auto slash = text.find('/');
  if (slash == std::string_view::npos) return parse_decimal(text);
  Rational num = parse_decimal(text.substr(0, slash));
  Rational den = parse_decimal(text.substr(slash + 1));
  if (den == 0) throw InputError("zero denominator in '" + std::string(text) + "'");
  return num / den;
}

Rational snap_to_decimal(double x) {
  if (!std::isfinite(x)) throw InputError("cannot represent non-finite value as rational");
  return parse_decimal(format_double(x));
}

std::string to_string(const Rational& r) { return r.str(); }

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), ptr);
}

Integer lcm(const Integer& a, const Integer& b) { return boost::multiprecision::lcm(a, b); }

}  // namespace arith
