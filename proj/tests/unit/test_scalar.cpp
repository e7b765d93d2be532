#include <walk/scalar.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace walk;

TEST(ParseNumber, AcceptsPlainDecimals) {
    EXPECT_EQ(parse_number("42"), 42.0);
    EXPECT_EQ(parse_number("-3.25"), -3.25);
    EXPECT_EQ(parse_number("1e3"), 1000.0);
    EXPECT_EQ(parse_number("2.5E-1"), 0.25);
    EXPECT_EQ(parse_number("0.5"), 0.5);
}

TEST(ParseNumber, RejectsNonNumbers) {
    for (const char* text : {"", " 1", "1 ", "abc", "0x10", "inf", "nan", "-", "1e", "1.2.3", "+"}) {
        EXPECT_FALSE(parse_number(text).has_value()) << text;
    }
}

TEST(ParseNumber, NegativeZeroBecomesZero) {
    auto v = parse_number("-0");
    ASSERT_TRUE(v);
    EXPECT_FALSE(std::signbit(*v));
}

TEST(FormatNumber, ShortestRoundTrip) {
    EXPECT_EQ(format_number(2.5), "2.5");
    EXPECT_EQ(format_number(3.0), "3");
    EXPECT_EQ(format_number(0.1), "0.1");
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(-1e9, 1e9);
    for (int i = 0; i < 2000; ++i) {
        double v = dist(rng);
        EXPECT_EQ(std::stod(format_number(v)), v);
    }
}

TEST(IsoDatetime, ParsesDatesAndTimes) {
    EXPECT_EQ(parse_iso_datetime("1970-01-01")->millis, 0);
    EXPECT_EQ(parse_iso_datetime("2011-01-02")->millis, 1293926400000LL);
    EXPECT_EQ(parse_iso_datetime("2012-06-30T12:30:15Z")->millis, 1341059415000LL);
    EXPECT_EQ(parse_iso_datetime("2012-06-30 12:30:15")->millis, 1341059415000LL);
    EXPECT_FALSE(parse_iso_datetime("2012-13-01"));
    EXPECT_FALSE(parse_iso_datetime("2012-02-30"));
    EXPECT_FALSE(parse_iso_datetime("12/01/2012"));
    EXPECT_FALSE(parse_iso_datetime("2012-01-01T25:00:00"));
}

TEST(IsoDatetime, FormatsWithOptionalMillis) {
    EXPECT_EQ(format_iso_datetime(Timestamp{1341059415000LL}), "2012-06-30T12:30:15Z");
    EXPECT_EQ(format_iso_datetime(Timestamp{1341059415123LL}), "2012-06-30T12:30:15.123Z");
    EXPECT_EQ(format_sql_datetime(Timestamp{1341059415000LL}), "2012-06-30 12:30:15");
    EXPECT_EQ(format_sql_datetime(Timestamp{-1}), "1969-12-31 23:59:59.999");
}

TEST(IsoDatetime, RoundTripsAcrossCenturies) {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::int64_t> dist(-2208988800000LL, 4102444800000LL);
    for (int i = 0; i < 2000; ++i) {
        Timestamp ts{dist(rng) / 1000 * 1000};
        auto back = parse_iso_datetime(format_iso_datetime(ts));
        ASSERT_TRUE(back);
        EXPECT_EQ(back->millis, ts.millis);
    }
}

TEST(CompareScalars, NullsFirstThenNaturalOrder) {
    EXPECT_TRUE(compare_scalars(Scalar{}, Scalar{-1e300}) < 0);
    EXPECT_TRUE(compare_scalars(Scalar{1.0}, Scalar{2.0}) < 0);
    EXPECT_TRUE(compare_scalars(Scalar{std::string("a")}, Scalar{std::string("b")}) < 0);
    EXPECT_TRUE(compare_scalars(Scalar{Timestamp{1}}, Scalar{Timestamp{2}}) < 0);
    EXPECT_TRUE(compare_scalars(Scalar{}, Scalar{}) == 0);
}

TEST(ScalarsIdentical, FloatsCompareBitwise) {
    EXPECT_TRUE(scalars_identical(Scalar{1.5}, Scalar{1.5}));
    EXPECT_FALSE(scalars_identical(Scalar{0.0}, Scalar{-0.0}));
    EXPECT_FALSE(scalars_identical(Scalar{1.0}, Scalar{std::string("1")}));
    EXPECT_TRUE(scalars_identical(Scalar{}, Scalar{}));
}

TEST(ScalarToText, DisplayForms) {
    EXPECT_EQ(scalar_to_text(Scalar{}), "");
    EXPECT_EQ(scalar_to_text(Scalar{2.5}), "2.5");
    EXPECT_EQ(scalar_to_text(Scalar{std::string("x")}), "x");
    EXPECT_EQ(scalar_to_text(Scalar{Timestamp{0}}), "1970-01-01T00:00:00Z");
}
