#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixlt/cocycle.hpp"
#include "mixlt/error.hpp"
#include "mixlt/parallel.hpp"
#include "mixlt/rng.hpp"

namespace mixlt {

inline constexpr double kRauzyTieTolerance = 1e-14;
inline constexpr std::int64_t kZorichRunCap = 1'000'000;
inline constexpr std::int64_t kVisitationGuard = std::int64_t{1} << 62;

// One-line notation p(i) = position after the exchange of the i-th interval, 1-based.
inline void validate_permutation(const std::vector<int>& p)
{
    const int d = static_cast<int>(p.size());
    if (d < 1)
        throw ConfigError("permutation must be nonempty");
    std::vector<bool> seen(static_cast<std::size_t>(d), false);
    for (int v : p) {
        if (v < 1 || v > d || seen[static_cast<std::size_t>(v - 1)])
            throw ConfigError("permutation must be a bijection of 1..d");
        seen[static_cast<std::size_t>(v - 1)] = true;
    }
    int prefix_max = 0;
    for (int k = 1; k < d; ++k) {
        prefix_max = std::max(prefix_max, p[static_cast<std::size_t>(k - 1)]);
        if (prefix_max == k)
            throw ConfigError("permutation is reducible: prefix {1.." + std::to_string(k) + "} is invariant");
    }
}

/*!
 * Interval exchange on [0, 1): intervals are labelled 0..d-1 in top order
 * with the given lengths; `bottom` lists labels in their order after the
 * exchange.
 */
template <typename Real = double>
class IET {
  public:
    IET(const std::vector<int>& permutation, std::vector<Real> lengths) : lengths_(std::move(lengths))
    {
        validate_permutation(permutation);
        const std::size_t d = permutation.size();
        if (lengths_.size() != d)
            throw ConfigError("IET needs one length per interval");
        top_.resize(d);
        bottom_.resize(d);
        for (std::size_t i = 0; i < d; ++i) {
            top_[i] = static_cast<int>(i);
            bottom_[static_cast<std::size_t>(permutation[i] - 1)] = static_cast<int>(i);
        }
        Real total = 0;
        for (const Real& l : lengths_) {
            if (!(l > 0))
                throw ConfigError("IET lengths must be positive");
            total += l;
        }
        using std::abs;
        if (abs(total - Real(1)) > Real(1e-12))
            throw ConfigError("IET lengths must sum to 1");
    }

    [[nodiscard]] std::size_t d() const noexcept { return top_.size(); }
    [[nodiscard]] const std::vector<Real>& lengths() const noexcept { return lengths_; }
    [[nodiscard]] const std::vector<int>& top() const noexcept { return top_; }
    [[nodiscard]] const std::vector<int>& bottom() const noexcept { return bottom_; }

    // Lengths listed in top order.
    [[nodiscard]] std::vector<Real> top_lengths() const
    {
        std::vector<Real> out;
        for (int label : top_)
            out.push_back(lengths_[static_cast<std::size_t>(label)]);
        return out;
    }

    // Current one-line permutation.
    [[nodiscard]] std::vector<int> permutation() const
    {
        std::vector<int> out(d());
        for (std::size_t i = 0; i < d(); ++i)
            out[i] = position(bottom_, top_[i]) + 1;
        return out;
    }

    [[nodiscard]] Real total_length() const
    {
        Real total = 0;
        for (const Real& l : lengths_)
            total += l;
        return total;
    }

    [[nodiscard]] Real apply(Real t) const
    {
        using std::abs;
        const Real total = total_length();
        if (t < 0 || !(t < total))
            throw DomainError("IET argument must lie in [0, total length)");
        Real left = 0;
        std::size_t i = 0;
        for (; i < d(); ++i) {
            const Real right = left + lengths_[static_cast<std::size_t>(top_[i])];
            if (t < right || i + 1 == d())
                break;
            left = right;
        }
        if (i > 0 && abs(t - left) <= Real(kRauzyTieTolerance))
            throw NonGenericError("IET argument hits a discontinuity; resample the point");
        const int label = top_[i];
        Real image = 0;
        for (int j : bottom_) {
            if (j == label)
                break;
            image += lengths_[static_cast<std::size_t>(j)];
        }
        return image + (t - left);
    }

  private:
    template <typename R>
    friend class RauzyState;

    static int position(const std::vector<int>& row, int label)
    {
        return static_cast<int>(std::find(row.begin(), row.end(), label) - row.begin());
    }

    std::vector<Real> lengths_;  // by label
    std::vector<int> top_;
    std::vector<int> bottom_;
};

enum class RauzyType { none, top, bottom };

struct ZorichRun {
    RauzyType type = RauzyType::none;
    std::int64_t length = 0;   // Rauzy steps aggregated
    Matrix matrix;             // product of E^T over the run, in application order
    double log_factor = 0.0;   // log(1 / total length) before renormalization
};

/*!
 * Rauzy-Veech induction state. The visitation matrix is B_n = E_n^T ... E_1^T
 * where lambda_old = E lambda_new at each step; it is kept in exact integers
 * until an entry would pass 2^62, after which a renormalized floating copy
 * and its log scale are kept instead.
 */
template <typename Real = double>
class RauzyState {
  public:
    explicit RauzyState(IET<Real> iet) : iet_(std::move(iet))
    {
        const auto d = static_cast<Eigen::Index>(iet_.d());
        visitation_ = IntMatrix::Identity(d, d);
    }

    [[nodiscard]] const IET<Real>& iet() const noexcept { return iet_; }
    [[nodiscard]] std::int64_t step_count() const noexcept { return steps_; }
    [[nodiscard]] RauzyType last_type() const noexcept { return last_type_; }
    [[nodiscard]] bool visitation_exact() const noexcept { return exact_; }
    [[nodiscard]] const IntMatrix& visitation() const
    {
        if (!exact_)
            throw OverflowError("visitation matrix passed 2^62; only log-scale data is kept");
        return visitation_;
    }
    // Renormalized floating visitation and its log scale (valid in both modes).
    [[nodiscard]] Matrix visitation_float() const { return exact_ ? visitation_.cast<double>() : floating_; }
    [[nodiscard]] double visitation_log_scale() const noexcept { return exact_ ? 0.0 : log_scale_; }

    // Type of the next step; throws on a tie.
    [[nodiscard]] RauzyType next_type() const
    {
        using std::abs;
        const Real la = iet_.lengths_[static_cast<std::size_t>(iet_.top_.back())];
        const Real lb = iet_.lengths_[static_cast<std::size_t>(iet_.bottom_.back())];
        if (abs(la - lb) <= Real(kRauzyTieTolerance) * iet_.total_length())
            throw NonGenericError("Rauzy step tie: last top and bottom lengths agree within 1e-14");
        return la > lb ? RauzyType::top : RauzyType::bottom;
    }

    RauzyType rauzy_step()
    {
        const RauzyType type = next_type();
        auto& top = iet_.top_;
        auto& bottom = iet_.bottom_;
        const int a = top.back();
        const int b = bottom.back();
        auto& lengths = iet_.lengths_;
        if (type == RauzyType::top) {
            lengths[static_cast<std::size_t>(a)] -= lengths[static_cast<std::size_t>(b)];
            bottom.pop_back();
            bottom.insert(bottom.begin() + IET<Real>::position(bottom, a) + 1, b);
            add_row(b, a);
        } else {
            lengths[static_cast<std::size_t>(b)] -= lengths[static_cast<std::size_t>(a)];
            top.pop_back();
            top.insert(top.begin() + IET<Real>::position(top, b) + 1, a);
            add_row(a, b);
        }
        ++steps_;
        last_type_ = type;
        return type;
    }

    // One maximal run of equal-type Rauzy steps, then renormalize lengths to sum 1.
    ZorichRun zorich_step()
    {
        const auto d = static_cast<Eigen::Index>(iet_.d());
        ZorichRun run;
        run.matrix = Matrix::Identity(d, d);
        run.type = next_type();
        while (true) {
            const int a = iet_.top_.back();
            const int b = iet_.bottom_.back();
            rauzy_step();
            if (run.type == RauzyType::top)
                run.matrix.row(b) += run.matrix.row(a);
            else
                run.matrix.row(a) += run.matrix.row(b);
            if (++run.length > kZorichRunCap)
                throw NumericalError("Zorich run exceeded 10^6 Rauzy steps; degenerate orbit");
            if (next_type() != run.type)
                break;
        }
        const Real total = iet_.total_length();
        using std::log;
        run.log_factor = static_cast<double>(-log(total));
        for (auto& l : iet_.lengths_)
            l /= total;
        return run;
    }

  private:
    // row[target] += row[source] on the visitation.
    void add_row(int target, int source)
    {
        if (exact_) {
            bool overflow = false;
            for (Eigen::Index j = 0; j < visitation_.cols(); ++j)
                if (visitation_(target, j) > kVisitationGuard - visitation_(source, j))
                    overflow = true;
            if (!overflow) {
                visitation_.row(target) += visitation_.row(source);
                return;
            }
            exact_ = false;
            floating_ = visitation_.cast<double>();
            log_scale_ = 0.0;
        }
        floating_.row(target) += floating_.row(source);
        const double norm = floating_.norm();
        if (norm > 1e100) {
            log_scale_ += std::log(norm);
            floating_ /= norm;
        }
    }

    IET<Real> iet_;
    IntMatrix visitation_;
    Matrix floating_;
    double log_scale_ = 0.0;
    bool exact_ = true;
    std::int64_t steps_ = 0;
    RauzyType last_type_ = RauzyType::none;
};

// Uniform point of the open simplex via normalized exponentials.
inline std::vector<double> simplex_lengths(std::size_t d, Stream& stream)
{
    std::vector<double> out(d);
    double total = 0.0;
    for (auto& l : out) {
        l = stream.exponential();
        total += l;
    }
    for (auto& l : out)
        l /= total;
    return out;
}

struct ZorichSpectrum {
    LyapunovEstimate estimate;
    std::vector<double> ratios;  // theta_i / theta_1
    std::size_t surviving = 0;
    std::size_t aborted = 0;
    std::vector<std::string> abort_reasons;
};

struct ZorichOptions {
    std::int64_t burn_in = 64;
    unsigned workers = 1;
};

/*!
 * Lyapunov spectrum of the Zorich cocycle, with time measured as the
 * accumulated log of the length renormalization factors.
 */
inline ZorichSpectrum zorich_spectrum(const std::vector<int>& permutation, std::size_t n_orbits,
                                      std::int64_t n_steps, const Stream& stream, ZorichOptions options = {})
{
    validate_permutation(permutation);
    if (n_orbits < 1 || n_steps < 1)
        throw DomainError("zorich_spectrum needs positive orbit and step counts");
    const auto d = static_cast<int>(permutation.size());
    struct Outcome {
        std::vector<double> exponents;
        std::string error;
    };
    auto outcomes = parallel_map(n_orbits, options.workers, [&](std::size_t orbit) {
        Outcome out;
        Stream s = stream.split(orbit);
        try {
            RauzyState<double> state(IET<double>(permutation, simplex_lengths(permutation.size(), s)));
            QrAccumulator acc(random_frame(d, s));
            for (std::int64_t i = 0; i < options.burn_in; ++i) {
                acc.push(state.zorich_step().matrix);
                acc.orthonormalize(false);
            }
            double time = 0.0;
            for (std::int64_t i = 0; i < n_steps; ++i) {
                const ZorichRun run = state.zorich_step();
                acc.push(run.matrix);
                acc.orthonormalize();
                time += run.log_factor;
            }
            out.exponents.resize(static_cast<std::size_t>(d));
            for (int i = 0; i < d; ++i)
                out.exponents[static_cast<std::size_t>(i)] = acc.log_r()(i) / time;
        } catch (const NumericalError& e) {
            out.exponents.clear();
            out.error = "orbit " + std::to_string(orbit) + ": " + e.what();
        }
        return out;
    });
    ZorichSpectrum result;
    std::vector<std::vector<double>> survivors;
    for (auto& o : outcomes) {
        if (o.error.empty()) {
            survivors.push_back(std::move(o.exponents));
        } else {
            ++result.aborted;
            result.abort_reasons.push_back(std::move(o.error));
        }
    }
    result.surviving = survivors.size();
    if (10 * result.surviving < 9 * n_orbits)
        throw NumericalError("zorich_spectrum: fewer than 90% of orbits survived (" +
                             std::to_string(result.surviving) + "/" + std::to_string(n_orbits) + ")");
    result.estimate = aggregate_spectra(std::move(survivors));
    result.estimate.n_used = n_steps;
    result.estimate.time_normalization = "log of Zorich length renormalization";
    for (std::size_t orbit = 0; orbit < n_orbits; ++orbit)
        result.estimate.seeds_used.push_back(stream.split(orbit).key());
    const double top = result.estimate.exponents.front();
    for (double e : result.estimate.exponents)
        result.ratios.push_back(e / top);
    return result;
}

}  // namespace mixlt
