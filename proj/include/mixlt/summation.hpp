#pragma once

#include <cmath>

namespace mixlt {

// Neumaier's variant of Kahan compensated summation.
class CompensatedSum {
  public:
    CompensatedSum& operator+=(double value) noexcept
    {
        const double t = sum_ + value;
        if (std::abs(sum_) >= std::abs(value))
            compensation_ += (sum_ - t) + value;
        else
            compensation_ += (value - t) + sum_;
        sum_ = t;
        return *this;
    }

    [[nodiscard]] double value() const noexcept { return sum_ + compensation_; }

  private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

// Welford running mean / variance.
class RunningMoments {
  public:
    void add(double x) noexcept
    {
        ++count_;
        const double delta = x - mean_;
        mean_ += delta / static_cast<double>(count_);
        m2_ += delta * (x - mean_);
    }

    [[nodiscard]] long long count() const noexcept { return count_; }
    [[nodiscard]] double mean() const noexcept { return mean_; }

    // Unbiased sample variance; 0 for fewer than two values.
    [[nodiscard]] double variance() const noexcept
    {
        return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0;
    }

    [[nodiscard]] double std_error() const noexcept
    {
        return count_ > 1 ? std::sqrt(variance() / static_cast<double>(count_)) : 0.0;
    }

  private:
    long long count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

}  // namespace mixlt
