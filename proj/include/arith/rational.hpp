#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cstdint>
#include <string>
#include <string_view>

namespace arith {

using Rational = boost::multiprecision::mpq_rational;
using Integer = boost::multiprecision::mpz_int;

// Parses "0.36", "-1.5e-3", "7" or "3/5" into an exact rational. Throws
// InputError on anything else.
Rational parse_rational(std::string_view text);

// The exact rational denoted by the shortest decimal that round-trips to x,
// e.g. snap_to_decimal(0.1) == 1/10 rather than the binary expansion.
Rational snap_to_decimal(double x);

// Exact value of the binary double.
inline Rational exact_from_double(double x) { return Rational(x); }

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

// "num/den", or "num" for integers.
std::string to_string(const Rational& r);

// Shortest decimal that round-trips through strtod.
std::string format_double(double x);

Integer lcm(const Integer& a, const Integer& b);

}  // namespace arith
