#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "mixlt/dynamics.hpp"
#include "mixlt/summation.hpp"

using namespace mixlt;

namespace {

IntMatrix cat_matrix()
{
    IntMatrix m(2, 2);
    m << 2, 1, 1, 1;
    return m;
}

PhaseSpaceSystem cat_map(double amplitude = 0.1)
{
    return PhaseSpaceSystem::torus_automorphism(cat_matrix(), companion::StableTranslation{amplitude});
}

const TorusPoint& torus(const Point& p) { return std::get<TorusPoint>(p); }

double wrap(double c) { return c - std::floor(c); }

// Stable eigenvalue of [[2,1],[1,1]] and its unit eigenvector, in closed form.
const double kStableEigenvalue = (3.0 - std::sqrt(5.0)) / 2.0;
std::array<double, 2> stable_vector()
{
    // (2 1; 1 1)(1, s) = lambda (1, s) gives s = lambda - 2.
    const double second = kStableEigenvalue - 2.0;
    const double norm = std::sqrt(1.0 + second * second);
    return {1.0 / norm, second / norm};
}

}  // namespace

TEST(Torus, CatMapFixedPoint)
{
    const auto sys = cat_map();
    const Point x = TorusPoint::from_coords({0.0, 0.0});
    const auto y = torus(apply_map(sys, x, 7));
    EXPECT_EQ(y.coord(0), 0.0);
    EXPECT_EQ(y.coord(1), 0.0);
}

TEST(Torus, ZeroIterateIsIdentity)
{
    const auto sys = cat_map();
    const Point x = TorusPoint::from_coords({0.3, 0.7});
    EXPECT_EQ(torus(apply_map(sys, x, 0)), torus(x));
}

TEST(Torus, ForwardBackwardReturns)
{
    const auto sys = cat_map();
    const Point x = TorusPoint::from_coords({0.3, 0.7});
    const auto back = torus(apply_map(sys, apply_map(sys, x, 3), -3));
    EXPECT_NEAR(back.coord(0), 0.3, 1e-10);
    EXPECT_NEAR(back.coord(1), 0.7, 1e-10);
}

TEST(Torus, OneStepMatchesMatrix)
{
    const auto sys = cat_map();
    const auto y = torus(apply_map(sys, TorusPoint::from_coords({0.3, 0.45}), 1));
    EXPECT_NEAR(y.coord(0), wrap(2 * 0.3 + 0.45), 1e-15);
    EXPECT_NEAR(y.coord(1), wrap(0.3 + 0.45), 1e-15);
}

TEST(Torus, TranslationStep)
{
    const auto sys = PhaseSpaceSystem::torus_translation({0.25, 0.5});
    const auto y = torus(apply_map(sys, TorusPoint::from_coords({0.9, 0.1}), 3));
    EXPECT_NEAR(y.coord(0), wrap(0.9 + 0.75), 1e-15);
    EXPECT_NEAR(y.coord(1), wrap(0.1 + 1.5), 1e-15);
}

TEST(Torus, RejectsNonUnimodularMatrix)
{
    IntMatrix m(2, 2);
    m << 2, 0, 0, 1;
    EXPECT_THROW(PhaseSpaceSystem::torus_automorphism(m), ConfigError);
}

TEST(Companion, StableTranslationMatchesEigenvector)
{
    const auto sys = cat_map(0.1);
    const auto v = stable_vector();
    const auto ux = torus(apply_companion(sys, TorusPoint::from_coords({0.0, 0.0})));
    EXPECT_NEAR(ux.coord(0), wrap(0.1 * v[0]), 1e-12);
    EXPECT_NEAR(ux.coord(1), wrap(0.1 * v[1]), 1e-12);
    ASSERT_TRUE(sys.stable_eigen().has_value());
    EXPECT_NEAR(sys.stable_eigen()->eigenvalue, kStableEigenvalue, 1e-14);
}

TEST(Companion, ZeroAmplitudeAndIdentityFixPoints)
{
    const Point x = TorusPoint::from_coords({0.125, 0.625});
    EXPECT_EQ(torus(apply_companion(cat_map(0.0), x)), torus(x));
    const auto id = PhaseSpaceSystem::torus_automorphism(cat_matrix(), companion::Identity{});
    EXPECT_EQ(torus(apply_companion(id, x)), torus(x));
}

TEST(Companion, StableTranslationNeedsRealStableEigenvalue)
{
    IntMatrix rotation(2, 2);
    rotation << 0, -1, 1, 0;
    EXPECT_THROW(PhaseSpaceSystem::torus_automorphism(rotation, companion::StableTranslation{0.1}),
                 UnsupportedSystemError);
    EXPECT_THROW(PhaseSpaceSystem::torus_translation({0.1, 0.2}, companion::StableTranslation{0.1}),
                 UnsupportedSystemError);
}

TEST(Companion, MissingCompanionRejected)
{
    const auto sys = PhaseSpaceSystem::torus_automorphism(cat_matrix());
    EXPECT_THROW((void)apply_companion(sys, TorusPoint::from_coords({0.1, 0.2})), ConfigError);
    EXPECT_THROW((void)contraction_profile(sys, TorusPoint::from_coords({0.1, 0.2}), 10), ConfigError);
}

TEST(Distance, TorusWrapsAround)
{
    const auto sys = cat_map();
    EXPECT_NEAR(distance(sys, TorusPoint::from_coords({0.1, 0.1}), TorusPoint::from_coords({0.9, 0.1})), 0.2, 1e-12);
}

TEST(Distance, SymbolicFirstDisagreement)
{
    const auto sys = PhaseSpaceSystem::two_sided_shift({0.5, 0.5});
    const SymbolicPoint x(1234, 0, sys.symbol_law());
    // Search for a sequence agreeing with x on |k| <= 2 and disagreeing at k = -3.
    bool found = false;
    for (std::uint64_t seed = 0; seed < 100000 && !found; ++seed) {
        const SymbolicPoint y(seed, 0, sys.symbol_law());
        bool agree = true;
        for (int k = -2; k <= 2 && agree; ++k)
            agree = x.coordinate(k) == y.coordinate(k);
        if (!agree || x.coordinate(-3) == y.coordinate(-3))
            continue;
        found = true;
        EXPECT_EQ(distance(sys, x, y), 0.125);
    }
    EXPECT_TRUE(found);
    EXPECT_EQ(distance(sys, x, x), 0.0);
}

TEST(Distance, MetricAxiomsOnSamples)
{
    Stream stream(5);
    for (const auto& sys : {cat_map(), PhaseSpaceSystem::two_sided_shift({0.3, 0.7})}) {
        for (int i = 0; i < 500; ++i) {
            Stream s = stream.split(static_cast<std::uint64_t>(i));
            const Point x = sample_measure(sys, s);
            const Point y = sample_measure(sys, s);
            const Point z = sample_measure(sys, s);
            const double dxy = distance(sys, x, y);
            EXPECT_GE(dxy, 0.0);
            EXPECT_EQ(dxy, distance(sys, y, x));
            EXPECT_LE(distance(sys, x, z), dxy + distance(sys, y, z) + 1e-12);
            EXPECT_EQ(distance(sys, x, x), 0.0);
        }
    }
}

TEST(Group, IterationLawExactOnTorus)
{
    const auto sys = cat_map();
    Stream stream(21);
    for (int i = 0; i < 200; ++i) {
        Stream s = stream.split(static_cast<std::uint64_t>(i));
        const Point x = sample_measure(sys, s);
        const auto a = static_cast<std::int64_t>(s.below(201)) - 100;
        const auto b = static_cast<std::int64_t>(s.below(201)) - 100;
        EXPECT_EQ(torus(apply_map(sys, apply_map(sys, x, a), b)), torus(apply_map(sys, x, a + b)));
    }
}

TEST(Group, IterationLawExactOnShift)
{
    const auto sys = PhaseSpaceSystem::two_sided_shift({0.5, 0.5});
    const Point x = SymbolicPoint(77, 0, sys.symbol_law());
    const auto y = std::get<SymbolicPoint>(apply_map(sys, apply_map(sys, x, 40), -13));
    EXPECT_EQ(y, std::get<SymbolicPoint>(apply_map(sys, x, 27)));
    for (int k = -5; k <= 5; ++k)
        EXPECT_EQ(y.coordinate(k), std::get<SymbolicPoint>(x).coordinate(k + 27));
}

TEST(Group, LargeIterateRejected)
{
    const auto sys = cat_map();
    EXPECT_THROW((void)apply_map(sys, TorusPoint::from_coords({0.1, 0.2}), std::int64_t{1} << 41), RangeError);
    const auto shift = PhaseSpaceSystem::two_sided_shift({0.5, 0.5});
    const Point edge = SymbolicPoint(1, std::numeric_limits<std::int64_t>::max() - 5, shift.symbol_law());
    EXPECT_THROW((void)apply_map(shift, edge, 10), RangeError);
}

TEST(Shift, LipschitzConstantTwo)
{
    const auto sys = PhaseSpaceSystem::two_sided_shift({0.5, 0.5});
    const SymbolicPoint x(99, 0, sys.symbol_law());
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 20000; ++seed) {
        const Point y = SymbolicPoint(seed, 0, sys.symbol_law());
        const double d = distance(sys, x, y);
        if (d >= 1.0)
            continue;
        ++checked;
        EXPECT_LE(distance(sys, apply_map(sys, x, 1), apply_map(sys, y, 1)), 2.0 * d);
        EXPECT_LE(distance(sys, apply_map(sys, x, -1), apply_map(sys, y, -1)), 2.0 * d);
    }
    EXPECT_GT(checked, 100);
}

TEST(Measure, TorusSamplesAreUniform)
{
    const auto sys = cat_map();
    Stream s(8);
    RunningMoments m0, m1;
    for (int i = 0; i < 100000; ++i) {
        const auto x = torus(sample_measure(sys, s));
        m0.add(x.coord(0));
        m1.add(x.coord(1));
    }
    EXPECT_NEAR(m0.mean(), 0.5, 0.005);
    EXPECT_NEAR(m1.mean(), 0.5, 0.005);
}

TEST(Measure, ShiftSymbolFrequencies)
{
    const auto sys = PhaseSpaceSystem::two_sided_shift({0.2, 0.3, 0.5});
    Stream s(9);
    std::array<int, 3> counts{};
    const int n = 60000;
    for (int i = 0; i < n; ++i)
        ++counts[static_cast<std::size_t>(std::get<SymbolicPoint>(sample_measure(sys, s)).coordinate(i % 11 - 5))];
    EXPECT_NEAR(counts[0] / double(n), 0.2, 0.01);
    EXPECT_NEAR(counts[1] / double(n), 0.3, 0.01);
    EXPECT_NEAR(counts[2] / double(n), 0.5, 0.01);
}

// mu(T^{-1} A) = mu(A) for a box A, checked by sampling x and testing Tx in A.
TEST(Measure, PreservedByCatMap)
{
    const auto sys = cat_map();
    Stream s(10);
    const int n = 100000;
    int inside = 0;
    for (int i = 0; i < n; ++i) {
        const auto y = torus(apply_map(sys, sample_measure(sys, s), 1));
        if (y.coord(0) < 0.3 && y.coord(1) >= 0.2 && y.coord(1) < 0.7)
            ++inside;
    }
    const double mass = 0.3 * 0.5;
    EXPECT_NEAR(inside / double(n), mass, 5.0 * std::sqrt(mass * (1 - mass) / n));
}

TEST(Contraction, IdentityCompanionIsZero)
{
    const auto sys = PhaseSpaceSystem::torus_automorphism(cat_matrix(), companion::Identity{});
    const auto p = contraction_profile(sys, TorusPoint::from_coords({0.2, 0.4}), 100);
    for (double d : p.distances)
        EXPECT_EQ(d, 0.0);
}

TEST(Contraction, TranslationPairIsIsometric)
{
    const auto sys = PhaseSpaceSystem::torus_translation({0.1234, 0.5}, companion::Translation{{0.01, 0.02}});
    const auto p = contraction_profile(sys, TorusPoint::from_coords({0.2, 0.4}), 1000);
    for (double d : p.distances)
        EXPECT_NEAR(d, std::hypot(0.01, 0.02), 1e-12);
}

TEST(Contraction, CatMapSlopeMatchesStableEigenvalue)
{
    const auto p = contraction_profile(cat_map(0.1), TorusPoint::from_coords({0.2, 0.4}), 1000);
    ASSERT_TRUE(p.slope.has_value());
    EXPECT_NEAR(*p.slope, std::log(kStableEigenvalue), 1e-9);
    EXPECT_NEAR(p.distances[1], 0.1 * kStableEigenvalue, 1e-15);
    EXPECT_EQ(p.distances.back(), 0.0);
}

// d_n / 0.382^n stays bounded: a contraction certificate at a rate just above lambda_s.
TEST(Contraction, CertificateBounded)
{
    const auto p = contraction_profile(cat_map(0.1), TorusPoint::from_coords({0.7, 0.1}), 700);
    double worst = 0.0;
    for (std::size_t n = 0; n <= 700; ++n)
        worst = std::max(worst, p.distances[n] / std::pow(0.382, static_cast<double>(n)));
    EXPECT_LE(worst, 0.1 + 1e-12);
}

TEST(Contraction, ProfileLengthCapped)
{
    EXPECT_THROW((void)contraction_profile(cat_map(), TorusPoint::from_coords({0.1, 0.1}), 10001), DomainError);
}
