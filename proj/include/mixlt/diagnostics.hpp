#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "mixlt/birkhoff.hpp"
#include "mixlt/cocycle.hpp"
#include "mixlt/dynamics.hpp"
#include "mixlt/parallel.hpp"
#include "mixlt/rng.hpp"

namespace mixlt {

// max ||C(x, r+s) - C(T^r x, s) C(x, r)|| / ||C(x, r+s)|| over random x and r, s >= 0 with r + s <= max_total.
inline double cocycle_identity_error(const MatrixCocycle& coc, std::size_t trials, std::int64_t max_total,
                                     const Stream& stream)
{
    double worst = 0.0;
    for (std::size_t i = 0; i < trials; ++i) {
        Stream s = stream.split(i);
        const Point x = sample_measure(coc.base(), s);
        const auto total = static_cast<std::int64_t>(s.below(static_cast<std::uint64_t>(max_total) + 1));
        const auto r = static_cast<std::int64_t>(s.below(static_cast<std::uint64_t>(total) + 1));
        const Matrix whole = evaluate(coc, x, total);
        const Matrix split = evaluate(coc, apply_map(coc.base(), x, r), total - r) * evaluate(coc, x, r);
        worst = std::max(worst, (whole - split).norm() / whole.norm());
    }
    return worst;
}

// max |S_N(x) - S_N^{-1}(T^{N-1} x)| over random x and the given N.
inline double time_reversal_error(const PhaseSpaceSystem& sys, const Observable& f, const NormalizingScheme& scheme,
                                  const std::vector<std::int64_t>& n_list, std::size_t points, const Stream& stream)
{
    double worst = 0.0;
    for (std::size_t i = 0; i < points; ++i) {
        Stream s = stream.split(i);
        const Point x = sample_measure(sys, s);
        for (std::int64_t n : n_list) {
            const double forward = corrected_sum(sys, f, scheme, x, n);
            const double backward = reversed_corrected_sum(sys, f, scheme, apply_map(sys, x, n - 1), n);
            worst = std::max(worst, std::abs(forward - backward));
        }
    }
    return worst;
}

// max |sigma_{Lambda^m}(x, e_1 ^ ... ^ e_m, N) - sum_{n<N} log|det A(T^n x)||.
inline double exterior_det_error(const MatrixCocycle& coc, std::int64_t n, std::size_t points, const Stream& stream)
{
    const MatrixCocycle top = exterior_power(coc, coc.dimension());
    double worst = 0.0;
    for (std::size_t i = 0; i < points; ++i) {
        Stream s = stream.split(i);
        const Point x = sample_measure(coc.base(), s);
        const double sigma = sigma_vec(top, x, Vector::Ones(1), n);
        CompensatedSum direct;
        coc.walk(x, n, [&](const Matrix& a) { direct += std::log(std::abs(a.fullPivLu().determinant())); });
        worst = std::max(worst, std::abs(sigma - direct.value()));
    }
    return worst;
}

// max |sigma_vec with renorm period 1 - sigma_vec with period 64| (64 reduced if the bound forbids it).
inline double renorm_transparency_error(const MatrixCocycle& coc, std::int64_t n, std::size_t points,
                                        const Stream& stream)
{
    int long_period = 64;
    if (coc.generator().log_norm_bound() > 0)
        long_period = std::min(long_period,
                               static_cast<int>(300.0 * std::numbers::ln2 / coc.generator().log_norm_bound()));
    const MatrixCocycle every = coc.with_renorm_period(1);
    const MatrixCocycle rare = coc.with_renorm_period(std::max(1, long_period));
    const ProjectiveSampler nu(coc.dimension());
    double worst = 0.0;
    for (std::size_t i = 0; i < points; ++i) {
        Stream s = stream.split(i);
        const Point x = sample_measure(coc.base(), s);
        const Vector v = nu.sample(s);
        worst = std::max(worst, std::abs(sigma_vec(every, x, v, n) - sigma_vec(rare, x, v, n)));
    }
    return worst;
}

struct SplittingSummary {
    std::size_t trials = 0;
    double max_growth = 0.0;       // worst relative growth of the running maximum over the final decade
    double max_running_max = 0.0;  // largest running maximum seen
    double mean_final = 0.0;       // mean of the final running maxima
};

enum class SplittingKind { dominated, strong, section, cocycle_adapted };

/*!
 * Profiles over `trials` random (x, v, w) with x ~ mu and v, w ~ nu; the
 * growth of the running maximum is measured from N = 0.9 N_max to N_max.
 */
inline SplittingSummary splitting_trials(const MatrixCocycle& coc, SplittingKind kind, std::size_t trials,
                                         std::size_t n_max, const Stream& stream, unsigned workers = 1,
                                         const Section* section = nullptr,
                                         const CompanionCocycle* companion = nullptr)
{
    const ProjectiveSampler nu(coc.dimension());
    auto profiles = parallel_map(trials, workers, [&](std::size_t i) {
        Stream s = stream.split(i);
        const Point x = sample_measure(coc.base(), s);
        const Vector v = nu.sample(s);
        const Vector w = nu.sample(s);
        SplittingProfile p;
        switch (kind) {
        case SplittingKind::dominated:
            p = dominated_splitting_profile(coc, x, v, w, n_max);
            break;
        case SplittingKind::strong:
            p = strong_splitting_profile(coc, x, v, n_max);
            break;
        case SplittingKind::section:
            p = section_genericity_profile(coc, *section, x, w, n_max);
            break;
        case SplittingKind::cocycle_adapted:
            p = cocycle_adaptedness_profile(coc, *companion, x, v, n_max);
            break;
        }
        return std::pair{p.final_growth(n_max - n_max / 10), p.running_max.empty() ? 0.0 : p.running_max.back()};
    });
    SplittingSummary out;
    out.trials = trials;
    CompensatedSum total;
    for (const auto& [growth, final_max] : profiles) {
        out.max_growth = std::max(out.max_growth, growth);
        out.max_running_max = std::max(out.max_running_max, final_max);
        total += final_max;
    }
    if (trials > 0)
        out.mean_final = total.value() / static_cast<double>(trials);
    return out;
}

}  // namespace mixlt
