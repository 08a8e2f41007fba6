#include "fixtures.hpp"

#include <gtest/gtest.h>

using namespace circlab;

TEST(Frac, ReducesModOne)
{
    EXPECT_EQ(frac(1.25), 0.25);
    EXPECT_EQ(frac(-0.25), 0.75);
    EXPECT_EQ(frac(7.0), 0.0);
}

TEST(Frac, TinyNegativeStaysBelowOne)
{
    double r = frac(-1e-20);
    EXPECT_GE(r, 0.0);
    EXPECT_LT(r, 1.0);
}

TEST(Frac, RejectsNonFinite)
{
    EXPECT_THROW(frac(std::nan("")), Error);
    EXPECT_THROW(frac(INFINITY), Error);
}

TEST(CcwDistance, Examples)
{
    EXPECT_DOUBLE_EQ(ccw_distance(0.2, 0.7), 0.5);
    EXPECT_DOUBLE_EQ(ccw_distance(0.7, 0.2), 0.5);
    EXPECT_EQ(ccw_distance(0.3, 0.3), 0.0);
    EXPECT_NEAR(ccw_distance(0.9, 0.1), 0.2, 1e-15);
}

TEST(CcwDistance, TwoWaysAroundSumToOne)
{
    CounterRng rng{11};
    for (std::uint64_t k = 0; k < 2000; k += 2) {
        double a = rng.uniform(k), b = rng.uniform(k + 1);
        if (a == b)
            continue;
        EXPECT_NEAR(ccw_distance(a, b) + ccw_distance(b, a), 1.0, 2 * fx::ulp());
    }
}

TEST(SortCcw, FromZero)
{
    std::vector<double> pts{0.9, 0.1, 0.5};
    auto p = sort_ccw(pts, 0.0);
    EXPECT_EQ(p, (std::vector<std::size_t>{1, 2, 0}));
}

TEST(SortCcw, FromInteriorBase)
{
    std::vector<double> pts{0.9, 0.1, 0.5};
    auto p = sort_ccw(pts, 0.6);
    EXPECT_EQ(p, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(SortCcw, UnresolvablePointsThrow)
{
    std::vector<double> pts{0.2, 0.2 + 1e-18};
    EXPECT_THROW(sort_ccw(pts, 0.0), ResolutionError);
    // wraparound neighbours count too
    std::vector<double> wrap{1e-16, 0.5, 1.0 - 1e-16};
    EXPECT_THROW(sort_ccw(wrap, 0.0), ResolutionError);
}

TEST(Arc, ShortArcIsResolutionError)
{
    EXPECT_THROW(make_arc(0.3, 0.3 + 1e-17, PrecisionContext{}), ResolutionError);
    Arc a = make_arc(0.9, 0.1, PrecisionContext{});
    EXPECT_NEAR(a.length, 0.2, 1e-15);
    EXPECT_TRUE(a.contains(0.95));
    EXPECT_TRUE(a.contains(0.05));
    EXPECT_FALSE(a.contains(0.5));
}

TEST(Precision, OnlyDoubleIsBacked)
{
    EXPECT_EQ(PrecisionContext::for_bits(53).mantissa_bits, 53);
    EXPECT_THROW(PrecisionContext::for_bits(52), Error);
    EXPECT_THROW(PrecisionContext::for_bits(113), Error);
    EXPECT_DOUBLE_EQ(PrecisionContext{}.min_resolvable_length, 1e3 * std::ldexp(1.0, -53));
}

TEST(CounterRng, StatelessAndSplittable)
{
    CounterRng a{5}, b{5};
    for (std::uint64_t k = 0; k < 100; ++k) {
        EXPECT_EQ(a.bits(k), b.bits(k));
        double u = a.uniform(k);
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
    }
    EXPECT_NE(a.split(1).bits(0), a.split(2).bits(0));
    EXPECT_EQ(a.split(3).bits(9), b.split(3).bits(9));
}
