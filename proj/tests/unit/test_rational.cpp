#include <gtest/gtest.h>

#include "arith/errors.hpp"
#include "arith/rational.hpp"

using arith::Rational;

TEST(Rational, ParsesDecimalStrings) {
  EXPECT_EQ(arith::parse_rational("0.36"), Rational(9, 25));
  EXPECT_EQ(arith::parse_rational("1"), Rational(1));
  EXPECT_EQ(arith::parse_rational("-1.5e-3"), Rational(-3, 2000));
  EXPECT_EQ(arith::parse_rational("2.5E2"), Rational(250));
  EXPECT_EQ(arith::parse_rational(".5"), Rational(1, 2));
  EXPECT_EQ(arith::parse_rational(" 0.1 "), Rational(1, 10));
}

TEST(Rational, ParsesFractions) {
  EXPECT_EQ(arith::parse_rational("3/5"), Rational(3, 5));
  EXPECT_EQ(arith::parse_rational("6/10"), Rational(3, 5));
  EXPECT_EQ(arith::parse_rational("0.5/2"), Rational(1, 4));
}

TEST(Rational, RejectsGarbage) {
  for (const char* bad : {"", "abc", "1.2.3", "1/0", "0x10", "1e", "--1", "1/"}) {
    EXPECT_THROW(arith::parse_rational(bad), arith::InputError) << bad;
  }
}

TEST(Rational, SnapUsesShortestDecimal) {
  EXPECT_EQ(arith::snap_to_decimal(0.1), Rational(1, 10));
  EXPECT_EQ(arith::snap_to_decimal(0.8), Rational(4, 5));
  EXPECT_NE(arith::exact_from_double(0.1), Rational(1, 10));
  EXPECT_EQ(arith::exact_from_double(0.5), Rational(1, 2));
}

TEST(Rational, Formatting) {
  EXPECT_EQ(arith::to_string(Rational(9, 25)), "9/25");
  EXPECT_EQ(arith::to_string(Rational(3)), "3");
  EXPECT_EQ(arith::format_double(0.1), "0.1");
  EXPECT_EQ(arith::format_double(1.0 / 3.0), "0.3333333333333333");
  for (double x : {0.1, 1e-300, 123456.789, 2.0 / 3.0}) {
    EXPECT_EQ(std::stod(arith::format_double(x)), x);
  }
}
