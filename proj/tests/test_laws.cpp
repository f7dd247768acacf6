#include <gtest/gtest.h>

#include <boost/math/distributions/normal.hpp>

#include <cmath>

#include "mixlt/laws.hpp"
#include "mixlt/rng.hpp"

using namespace mixlt;

TEST(Ks, DiracAgainstZeros)
{
    EXPECT_EQ(ks_distance(EmpiricalDistribution(std::vector<double>(50, 0.0)), ReferenceLaw::dirac_at_zero()), 0.0);
}

TEST(Ks, SingleZeroAgainstGaussian)
{
    EXPECT_NEAR(ks_distance(EmpiricalDistribution({0.0}), ReferenceLaw::gaussian(1.0)), 0.5, 1e-15);
}

// Samples on the quantile grid (i - 1/2)/n sit at distance exactly 1/(2n).
TEST(Ks, QuantileGrid)
{
    const boost::math::normal_distribution<double> normal(0.0, 2.0);
    for (std::size_t n : {10u, 100u, 1000u}) {
        std::vector<double> samples;
        for (std::size_t i = 1; i <= n; ++i)
            samples.push_back(boost::math::quantile(normal, (static_cast<double>(i) - 0.5) / static_cast<double>(n)));
        EXPECT_NEAR(ks_distance(EmpiricalDistribution(samples), ReferenceLaw::gaussian(4.0)), 0.5 / static_cast<double>(n), 1e-12);
    }
}

TEST(Ks, ValueInUnitInterval)
{
    Stream s(3);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> v;
        for (int i = 0; i < 1 + trial; ++i)
            v.push_back(3.0 * s.normal() + 1.0);
        for (const auto& law : {ReferenceLaw::gaussian(1.0), ReferenceLaw::dirac_at_zero()}) {
            const double d = ks_distance(EmpiricalDistribution(v), law);
            EXPECT_GE(d, 0.0);
            EXPECT_LE(d, 1.0);
        }
    }
}

TEST(Ks, DecaysWithSampleSize)
{
    Stream s(4);
    std::vector<double> v;
    for (int i = 0; i < 100000; ++i)
        v.push_back(s.normal());
    // Kolmogorov's 0.999 quantile is about 1.95.
    EXPECT_LT(ks_distance(EmpiricalDistribution(v), ReferenceLaw::gaussian(1.0)), 1.95 / std::sqrt(100000.0));
}

TEST(Ks, EmptySampleRejected)
{
    EXPECT_THROW((void)ks_distance(EmpiricalDistribution(std::vector<double>{}), ReferenceLaw::gaussian(1.0)), DomainError);
}

TEST(Ecdf, RightContinuous)
{
    const EmpiricalDistribution e({1.0, 2.0, 2.0, 3.0});
    EXPECT_EQ(e.ecdf(2.0), 0.75);
    EXPECT_EQ(e.ecdf_left(2.0), 0.25);
    EXPECT_EQ(e.ecdf(0.5), 0.0);
    EXPECT_EQ(e.ecdf(3.0), 1.0);
    EXPECT_EQ(e.mass(1.0, 3.0), 0.5);
}

TEST(LawMass, WholeLineIsOne)
{
    EXPECT_EQ(law_mass(ReferenceLaw::gaussian(2.0), Interval::whole_line()), 1.0);
    EXPECT_EQ(law_mass(ReferenceLaw::dirac_at_zero(), Interval::whole_line()), 1.0);
}

TEST(LawMass, Dirac)
{
    EXPECT_EQ(law_mass(ReferenceLaw::dirac_at_zero(), {-1.0, 1.0}), 1.0);
    EXPECT_EQ(law_mass(ReferenceLaw::dirac_at_zero(), {1.0, 2.0}), 0.0);
    EXPECT_THROW((void)law_mass(ReferenceLaw::dirac_at_zero(), {0.0, 1.0}), InvalidIntervalError);
}

TEST(LawMass, GaussianMatchesIndependentCdf)
{
    const boost::math::normal_distribution<double> normal(0.0, 0.5);
    const double expected = boost::math::cdf(normal, 1.0) - boost::math::cdf(normal, -1.0);
    EXPECT_NEAR(law_mass(ReferenceLaw::gaussian(0.25), {-1.0, 1.0}), expected, 1e-14);
    EXPECT_NEAR(expected, 0.9544997361036416, 1e-13);
    EXPECT_NEAR(law_mass(ReferenceLaw::gaussian(1.0), {5.0, 6.0}),
                boost::math::cdf(boost::math::complement(boost::math::normal(), 5.0)) -
                    boost::math::cdf(boost::math::complement(boost::math::normal(), 6.0)),
                1e-20);
}

TEST(LawMass, AdditiveOverDisjointIntervals)
{
    const auto law = ReferenceLaw::gaussian(0.7);
    const double whole = law_mass(law, {-2.0, 3.0});
    const double split = law_mass(law, {-2.0, 0.4}) + law_mass(law, {0.4, 3.0});
    EXPECT_NEAR(whole, split, 1e-12);
}

TEST(LawMass, InvalidIntervals)
{
    EXPECT_THROW((void)law_mass(ReferenceLaw::gaussian(1.0), {1.0, 1.0}), InvalidIntervalError);
    EXPECT_THROW((void)law_mass(ReferenceLaw::gaussian(1.0), {2.0, 1.0}), InvalidIntervalError);
}

TEST(Laws, ZeroVarianceGaussianIsDirac)
{
    const auto g = ReferenceLaw::gaussian(0.0);
    EXPECT_EQ(g.cdf(-1e-300), 0.0);
    EXPECT_EQ(g.cdf(0.0), 1.0);
    EXPECT_THROW((void)ReferenceLaw::gaussian(-1.0), ConfigError);
}

TEST(Laws, CharacteristicFunctions)
{
    const auto g = ReferenceLaw::gaussian(0.25);
    EXPECT_NEAR(g.characteristic(1.0).real(), std::exp(-0.125), 1e-15);
    EXPECT_EQ(g.characteristic(1.0).imag(), 0.0);
    EXPECT_EQ(ReferenceLaw::dirac_at_zero().characteristic(3.0), std::complex<double>(1.0, 0.0));
}
