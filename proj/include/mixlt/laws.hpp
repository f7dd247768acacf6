#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "mixlt/error.hpp"

namespace mixlt {

inline double standard_normal_cdf(double z) noexcept
{
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

// Sorted sample collection with its right-continuous ecdf.
class EmpiricalDistribution {
  public:
    EmpiricalDistribution() = default;
    explicit EmpiricalDistribution(std::vector<double> samples) : samples_(std::move(samples))
    {
        for (double s : samples_)
            if (std::isnan(s))
                throw DomainError("empirical distribution sample is NaN");
        std::sort(samples_.begin(), samples_.end());
    }

    [[nodiscard]] std::size_t count() const noexcept { return samples_.size(); }
    [[nodiscard]] std::span<const double> samples() const noexcept { return samples_; }

    // #{x <= t} / n
    [[nodiscard]] double ecdf(double t) const noexcept
    {
        if (samples_.empty())
            return 0.0;
        const auto it = std::upper_bound(samples_.begin(), samples_.end(), t);
        return static_cast<double>(it - samples_.begin()) / static_cast<double>(samples_.size());
    }

    // #{x < t} / n
    [[nodiscard]] double ecdf_left(double t) const noexcept
    {
        if (samples_.empty())
            return 0.0;
        const auto it = std::lower_bound(samples_.begin(), samples_.end(), t);
        return static_cast<double>(it - samples_.begin()) / static_cast<double>(samples_.size());
    }

    // Fraction of samples in the open interval (a, b).
    [[nodiscard]] double mass(double a, double b) const noexcept
    {
        if (samples_.empty())
            return 0.0;
        const auto lo = std::upper_bound(samples_.begin(), samples_.end(), a);
        const auto hi = std::lower_bound(samples_.begin(), samples_.end(), b);
        return hi > lo ? static_cast<double>(hi - lo) / static_cast<double>(samples_.size()) : 0.0;
    }

  private:
    std::vector<double> samples_;
};

/*!
 * Limiting law S of a normalized sum: a centered Gaussian of variance V,
 * the Dirac mass at 0, or an empirical law. gaussian(0) is the Dirac mass.
 */
class ReferenceLaw {
  public:
    enum class Kind { gaussian, dirac_at_zero, empirical };

    static ReferenceLaw gaussian(double variance)
    {
        if (!(variance >= 0.0) || !std::isfinite(variance))
            throw ConfigError("gaussian variance must be finite and >= 0");
        if (variance == 0.0)
            return dirac_at_zero();
        ReferenceLaw law;
        law.kind_ = Kind::gaussian;
        law.variance_ = variance;
        return law;
    }

    static ReferenceLaw dirac_at_zero()
    {
        ReferenceLaw law;
        law.kind_ = Kind::dirac_at_zero;
        return law;
    }

    static ReferenceLaw empirical(EmpiricalDistribution dist)
    {
        if (dist.count() == 0)
            throw ConfigError("empirical law needs at least one sample");
        ReferenceLaw law;
        law.kind_ = Kind::empirical;
        law.empirical_ = std::move(dist);
        return law;
    }

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] double variance() const noexcept { return variance_; }
    [[nodiscard]] const EmpiricalDistribution& distribution() const noexcept { return empirical_; }

    [[nodiscard]] double cdf(double t) const noexcept
    {
        switch (kind_) {
        case Kind::gaussian:
            return standard_normal_cdf(t / std::sqrt(variance_));
        case Kind::dirac_at_zero:
            return t >= 0.0 ? 1.0 : 0.0;
        case Kind::empirical:
            return empirical_.ecdf(t);
        }
        return 0.0;
    }

    // P(S < t)
    [[nodiscard]] double cdf_left(double t) const noexcept
    {
        switch (kind_) {
        case Kind::gaussian:
            return cdf(t);
        case Kind::dirac_at_zero:
            return t > 0.0 ? 1.0 : 0.0;
        case Kind::empirical:
            return empirical_.ecdf_left(t);
        }
        return 0.0;
    }

    // Points carrying positive mass.
    [[nodiscard]] std::vector<double> atoms() const
    {
        switch (kind_) {
        case Kind::gaussian:
            return {};
        case Kind::dirac_at_zero:
            return {0.0};
        case Kind::empirical: {
            std::vector<double> out(empirical_.samples().begin(), empirical_.samples().end());
            out.erase(std::unique(out.begin(), out.end()), out.end());
            return out;
        }
        }
        return {};
    }

    [[nodiscard]] bool has_atom_at(double t) const noexcept
    {
        return cdf(t) - cdf_left(t) > 0.0;
    }

    // E[exp(itS)]
    [[nodiscard]] std::complex<double> characteristic(double t) const
    {
        switch (kind_) {
        case Kind::gaussian:
            return {std::exp(-0.5 * variance_ * t * t), 0.0};
        case Kind::dirac_at_zero:
            return {1.0, 0.0};
        case Kind::empirical: {
            std::complex<double> sum{0.0, 0.0};
            for (double s : empirical_.samples())
                sum += std::polar(1.0, t * s);
            return sum / static_cast<double>(empirical_.count());
        }
        }
        return {};
    }

    [[nodiscard]] std::string name() const
    {
        switch (kind_) {
        case Kind::gaussian:
            return "gaussian";
        case Kind::dirac_at_zero:
            return "dirac_at_zero";
        case Kind::empirical:
            return "empirical";
        }
        return "?";
    }

  private:
    ReferenceLaw() = default;

    Kind kind_ = Kind::dirac_at_zero;
    double variance_ = 0.0;
    EmpiricalDistribution empirical_;
};

// Open interval (a, b); endpoints may be infinite.
struct Interval {
    double a = -std::numeric_limits<double>::infinity();
    double b = std::numeric_limits<double>::infinity();

    [[nodiscard]] bool contains(double s) const noexcept { return a < s && s < b; }

    static Interval whole_line() { return {}; }
};

// Reject intervals with a >= b or with an endpoint on an atom of the law,
// i.e. enforce P(S in {a, b}) = 0.
inline void validate_interval(const ReferenceLaw& law, const Interval& interval)
{
    if (std::isnan(interval.a) || std::isnan(interval.b) || !(interval.a < interval.b))
        throw InvalidIntervalError("interval must satisfy a < b");
    for (double endpoint : {interval.a, interval.b}) {
        if (std::isfinite(endpoint) && law.has_atom_at(endpoint))
            throw InvalidIntervalError("interval endpoint " + std::to_string(endpoint) +
                                       " carries positive mass under the " + law.name() + " law");
    }
}

// P(S in (a, b)).
inline double law_mass(const ReferenceLaw& law, const Interval& interval)
{
    validate_interval(law, interval);
    switch (law.kind()) {
    case ReferenceLaw::Kind::gaussian: {
        const double sd = std::sqrt(law.variance());
        // Use the upper tail when both endpoints are positive to avoid cancellation.
        if (interval.a > 0.0)
            return standard_normal_cdf(-interval.a / sd) - standard_normal_cdf(-interval.b / sd);
        return standard_normal_cdf(interval.b / sd) - standard_normal_cdf(interval.a / sd);
    }
    case ReferenceLaw::Kind::dirac_at_zero:
        return interval.contains(0.0) ? 1.0 : 0.0;
    case ReferenceLaw::Kind::empirical:
        return law.distribution().mass(interval.a, interval.b);
    }
    return 0.0;
}

// sup_t |F_n(t) - F(t)|, evaluated exactly at every jump of either
// function (both sides of each jump).
inline double ks_distance(const EmpiricalDistribution& emp, const ReferenceLaw& law)
{
    if (emp.count() == 0)
        throw DomainError("ks_distance needs at least one sample");
    double d = 0.0;
    const auto n = static_cast<double>(emp.count());
    const auto samples = emp.samples();
    auto check = [&](double t) {
        d = std::max(d, std::abs(emp.ecdf(t) - law.cdf(t)));
        d = std::max(d, std::abs(emp.ecdf_left(t) - law.cdf_left(t)));
    };
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (i > 0 && samples[i] == samples[i - 1])
            continue;
        if (law.kind() == ReferenceLaw::Kind::gaussian) {
            // Closed-form ecdf values at a run of ties; avoids two binary searches.
            std::size_t j = i;
            while (j + 1 < samples.size() && samples[j + 1] == samples[i])
                ++j;
            const double f = law.cdf(samples[i]);
            d = std::max(d, std::abs(static_cast<double>(j + 1) / n - f));
            d = std::max(d, std::abs(static_cast<double>(i) / n - f));
        } else {
            check(samples[i]);
        }
    }
    for (double atom : law.atoms())
        check(atom);
    return std::min(d, 1.0);
}

}  // namespace mixlt
