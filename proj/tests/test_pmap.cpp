#include "fixtures.hpp"

#include <gtest/gtest.h>

using namespace circlab;

namespace {

// smooth part of the variation and the L2 norm of D log Df for a fractional-linear branch, in closed form
struct MoebiusOracle {
    double var = 0.0, l2sq = 0.0;
    void add(double len, double d_start, double d_end)
    {
        var += std::abs(std::log(d_end / d_start));
        double e = (std::sqrt(d_start / d_end) - 1.0) / len;
        l2sq += 4.0 * e * e * len / (1.0 + e * len);
    }
};

} // namespace

TEST(BuildPl2, SlopesAndJumps)
{
    auto f = build_pl2(0.0, 0.5, 1.5, 0.0);
    EXPECT_DOUBLE_EQ(f.deriv_one_sided(0.25, Side::right), 1.5);
    EXPECT_DOUBLE_EQ(f.deriv_one_sided(0.75, Side::right), 0.5);
    EXPECT_DOUBLE_EQ(f.jump_ratio(0.5), 3.0);
    EXPECT_DOUBLE_EQ(f.jump_ratio(0.0), 1.0 / 3.0);
    EXPECT_NEAR(f.jump_ratio(0.0) * f.jump_ratio(0.5), 1.0, 1e-15);
    ASSERT_EQ(f.breaks().size(), 2u);
}

TEST(BuildPl2, QuarterBreak)
{
    auto f = build_pl2(0.0, 0.25, 3.0, 0.0);
    EXPECT_NEAR(f.deriv_one_sided(0.5, Side::right), 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(f.jump_ratio(0.25), 9.0, 1e-13);
}

TEST(BuildPl2, UnitSlopeIsRotation)
{
    auto f = build_pl2(0.0, 0.5, 1.0, 0.3);
    EXPECT_TRUE(f.breaks().empty());
    EXPECT_TRUE(f.is_rotation());
    EXPECT_NEAR(f.eval(0.1), 0.4, 1e-15);
    EXPECT_NEAR(f.eval(0.8), 0.1, 1e-15);
}

TEST(BuildPl2, InfeasibleSlope)
{
    EXPECT_THROW(build_pl2(0.0, 0.5, 2.0, 0.0), InfeasibleError);
    EXPECT_THROW(build_pl2(0.0, 0.5, -1.0, 0.0), InfeasibleError);
    EXPECT_THROW(build_pl2(0.3, 0.3, 1.5, 0.0), InfeasibleError);
}

TEST(Eval, Pl2Examples)
{
    auto f = build_pl2(0.0, 0.5, 1.5, 0.0);
    EXPECT_DOUBLE_EQ(f.eval(0.25), 0.375);
    EXPECT_DOUBLE_EQ(f.deriv_one_sided(0.5, Side::left), 1.5);
    EXPECT_DOUBLE_EQ(f.deriv_one_sided(0.5, Side::right), 0.5);
    EXPECT_DOUBLE_EQ(f.eval(0.5), 0.75);
}

TEST(Eval, OffsetShiftsImage)
{
    auto f = build_pl2(0.0, 0.5, 1.5, 0.4);
    EXPECT_NEAR(f.eval(0.25), 0.775, 1e-15);
    EXPECT_NEAR(f.eval(0.9), frac(0.4 + 0.75 + 0.5 * 0.4), 1e-15);
}

TEST(Inverse, RoundTripWithinFourUlp)
{
    CounterRng rng{17};
    for (const PiecewiseHomeo* f : {&fx::pl2(), &fx::moebius(), &fx::rotation()}) {
        for (std::uint64_t k = 0; k < 1000; ++k) {
            double x = rng.uniform(k);
            EXPECT_LE(circle_distance(f->inverse(f->eval(x)), x), 4 * fx::ulp()) << f->family << " x=" << x;
        }
    }
}

TEST(Inverse, InverseMapComposesToIdentity)
{
    auto g = fx::moebius().inverse_map();
    CounterRng rng{18};
    for (std::uint64_t k = 0; k < 500; ++k) {
        double x = rng.uniform(k);
        EXPECT_LE(circle_distance(g.eval(fx::moebius().eval(x)), x), 8 * fx::ulp());
    }
    // jumps of the inverse sit at the images of the breaks, reciprocal
    auto f = build_pl2(0.0, 0.5, 1.5, 0.0);
    auto fi = f.inverse_map();
    EXPECT_NEAR(fi.jump_ratio(f.eval(0.5)), 1.0 / 3.0, 1e-14);
}

TEST(Eval, MonotoneDegreeOne)
{
    const auto& f = fx::moebius();
    double total = 0.0;
    const int N = 4096;
    for (int i = 0; i < N; ++i) {
        double x = static_cast<double>(i) / N, y = static_cast<double>(i + 1) / N;
        double d = ccw_distance(f.eval(x), f.eval(y));
        EXPECT_GT(d, 0.0);
        EXPECT_LT(d, 0.5);
        total += d;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Eval, ContinuousAtBreaks)
{
    for (const PiecewiseHomeo* f : {&fx::pl2(), &fx::moebius()})
        for (double b : f->breaks())
            EXPECT_LE(circle_distance(f->eval(b, Side::left), f->eval(b, Side::right)), 2 * fx::ulp());
}

TEST(JumpRatio, RotationHasNoBreaks)
{
    EXPECT_THROW(fx::rotation().jump_ratio(0.3), NotABreakError);
    EXPECT_THROW(build_pl2(0.0, 0.5, 1.5, 0.0).jump_ratio(0.25), NotABreakError);
}

TEST(Orbit, RotationSteps)
{
    auto f = build_rotation(fx::golden);
    auto o = orbit(f, 0.0, 0, 3);
    ASSERT_EQ(o.size(), 4u);
    for (int i = 0; i < 4; ++i)
        EXPECT_NEAR(o[static_cast<std::size_t>(i)], frac(i * fx::golden), 4 * fx::ulp());
}

TEST(Orbit, MinusOneIsInverse)
{
    const auto& f = fx::pl2();
    auto o = orbit(f, 0.3, -1, -1);
    ASSERT_EQ(o.size(), 1u);
    EXPECT_EQ(o[0], f.inverse(0.3));
}

TEST(Orbit, DistinctAtGoldenCombinatorics)
{
    const auto& t = fx::gtab();
    auto o = orbit(fx::pl2(), 0.0, 0, t.q(10) + t.q(9) - 1);
    EXPECT_NO_THROW(sort_ccw(o, 0.0));
}

TEST(Orbit, CollisionIsResolutionError)
{
    // untuned pl2 fixes its first break
    auto f = build_pl2(0.0, 0.5, 1.5, 0.0);
    EXPECT_THROW(orbit(f, 0.0, 0, 3), ResolutionError);
    EXPECT_THROW(orbit(f, 0.0, -3, 0), ResolutionError);
}

TEST(LogCocycle, Basics)
{
    EXPECT_EQ(log_cocycle(fx::rotation(), 17, 0.3), 0.0);
    auto f = build_pl2(0.0, 0.5, 1.5, 0.0);
    EXPECT_DOUBLE_EQ(log_cocycle(f, 1, 0.2), std::log(1.5));
    EXPECT_DOUBLE_EQ(log_cocycle(f, 1, 0.7), std::log(0.5));
    // chain rule against one-sided derivatives
    EXPECT_NEAR(log_cocycle(f, 2, 0.2), std::log(1.5) + std::log(f.deriv_one_sided(f.eval(0.2), Side::right)), 1e-15);
}

TEST(LogCocycle, TunedPl2WithinVariation)
{
    const double v = 2.0 * std::log(3.0);
    CounterRng rng{19};
    auto k = fx::gtab().q(8);
    for (std::uint64_t i = 0; i < 100; ++i) {
        double L = log_cocycle(fx::pl2(), k, rng.uniform(i));
        EXPECT_LE(std::abs(L), v + 1e-9);
    }
}

TEST(Regularity, Rotation)
{
    auto r = fx::rotation().regularity();
    EXPECT_EQ(r.v, 0.0);
    EXPECT_EQ(r.ko_norm_p, 0.0);
    EXPECT_DOUBLE_EQ(r.c1, 1.0);
    EXPECT_DOUBLE_EQ(r.c2, 1.0);
}

TEST(Regularity, Pl2)
{
    auto r = build_pl2(0.0, 0.5, 1.5, 0.0).regularity();
    EXPECT_NEAR(r.v, 2.0 * std::log(3.0), 1e-14);
    EXPECT_EQ(r.ko_norm_p, 0.0);
    EXPECT_DOUBLE_EQ(r.c1, 0.5);
    EXPECT_DOUBLE_EQ(r.c2, 1.5);
}

TEST(Regularity, MoebiusAgainstClosedForm)
{
    auto f = build_moebius2(0.0, 0.5, 2.0, 0.0);
    MoebiusOracle o;
    // end derivatives worked out by hand for sigma_a = 2, equal halves
    const double r1 = 2.0 / 3.0, r2 = 4.0 / 3.0, s = std::sqrt(2.0);
    o.add(0.5, r1 * s, r1 / s);
    o.add(0.5, r2 / s, r2 * s);
    auto r = f.regularity(2.0);
    EXPECT_NEAR(r.v_jumps, 2.0 * std::log(2.0), 1e-12);
    EXPECT_NEAR(r.v, 2.0 * std::log(2.0) + o.var, 1e-9);
    EXPECT_NEAR(r.ko_norm_p, std::sqrt(o.l2sq), 1e-9);
    EXPECT_GT(r.ko_norm_p, 0.0);
    EXPECT_NEAR(f.jump_ratio(0.0), 2.0, 1e-12);
    EXPECT_NEAR(f.jump_ratio(0.5), 0.5, 1e-12);
    EXPECT_LE(r.c1, r.c2);
    EXPECT_GE(r.v, r.v_jumps);
}

TEST(BuildMoebius2, UnitJumpIsRotation)
{
    auto f = build_moebius2(0.0, 0.5, 1.0, 0.2);
    EXPECT_TRUE(f.is_rotation());
    EXPECT_NEAR(f.eval(0.5), 0.7, 1e-15);
}

TEST(BuildMoebius2, ProductConstraint)
{
    EXPECT_THROW(moebius_branch(0.5, 0.5, 2.0, 2.0), InfeasibleError);
    EXPECT_NO_THROW(moebius_branch(0.5, 0.5, 2.0, 0.5));
    EXPECT_THROW(build_moebius2(0.0, 0.5, -2.0, 0.0), InfeasibleError);
}

TEST(BuildMoebius2, SkewKeepsJumps)
{
    auto f = build_moebius2(0.0, 0.4, 3.0, 0.1, PrecisionContext{}, 1.7);
    EXPECT_NEAR(f.jump_ratio(0.0), 3.0, 1e-12);
    EXPECT_NEAR(f.jump_ratio(0.4), 1.0 / 3.0, 1e-12);
}

TEST(WithOffset, RebuildsSameFamily)
{
    auto f = build_moebius2(0.0, 0.5, 2.0, 0.0);
    auto g = with_offset(f, 0.25);
    EXPECT_EQ(g.family, "moebius2");
    EXPECT_NEAR(g.eval(0.3), frac(f.eval(0.3) + 0.25), 1e-15);
}
