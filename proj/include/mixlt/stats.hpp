#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "mixlt/birkhoff.hpp"
#include "mixlt/cocycle.hpp"
#include "mixlt/dynamics.hpp"
#include "mixlt/laws.hpp"
#include "mixlt/parallel.hpp"
#include "mixlt/rng.hpp"
#include "mixlt/summation.hpp"

namespace mixlt {

//---------------------------------------------------------------------------//
// Events
//---------------------------------------------------------------------------//

namespace event {
struct FullSpace {};
// Product of half-open boxes [lower_i, upper_i).
struct TorusBox {
    std::vector<double> lower, upper;
};
// {x : x_{first + j} = symbols[j]}
struct ShiftCylinder {
    std::int64_t first = 0;
    std::vector<int> symbols;
};
// Lines within angle `radius` of the center line, radius in (0, pi/2].
struct ProjectiveCap {
    Vector center;
    double radius = 0.0;
};
}  // namespace event

class Event {
  public:
    using Kind = std::variant<event::FullSpace, event::TorusBox, event::ShiftCylinder, event::ProjectiveCap>;

    static Event full_space()
    {
        Event e;
        e.mass_ = 1.0;
        return e;
    }

    static Event torus_box(const PhaseSpaceSystem& sys, std::vector<double> lower, std::vector<double> upper)
    {
        if (!sys.is_torus())
            throw ConfigError("torus_box needs a torus system");
        if (lower.size() != sys.dimension() || upper.size() != sys.dimension())
            throw ConfigError("torus_box bounds must match the torus dimension");
        double mass = 1.0;
        for (std::size_t i = 0; i < lower.size(); ++i) {
            if (!(0.0 <= lower[i] && lower[i] <= upper[i] && upper[i] <= 1.0))
                throw ConfigError("torus_box bounds must satisfy 0 <= lower <= upper <= 1");
            mass *= upper[i] - lower[i];
        }
        Event e;
        e.kind_ = event::TorusBox{std::move(lower), std::move(upper)};
        e.mass_ = mass;
        e.dim_ = sys.dimension();
        return e;
    }

    static Event shift_cylinder(const PhaseSpaceSystem& sys, std::int64_t first, std::vector<int> symbols)
    {
        if (!sys.is_shift())
            throw ConfigError("shift_cylinder needs a shift system");
        if (symbols.empty())
            throw ConfigError("shift_cylinder needs at least one symbol");
        const auto& weights = sys.symbol_law()->weights();
        double mass = 1.0;
        for (int s : symbols) {
            if (s < 0 || s >= static_cast<int>(weights.size()))
                throw ConfigError("shift_cylinder symbol outside the alphabet");
            mass *= weights[static_cast<std::size_t>(s)];
        }
        Event e;
        e.kind_ = event::ShiftCylinder{first, std::move(symbols)};
        e.mass_ = mass;
        return e;
    }

    static Event projective_cap(Vector center, double radius)
    {
        if (center.size() < 1 || !(center.norm() > 0.0))
            throw ConfigError("projective_cap center must be a nonzero vector");
        if (!(radius > 0.0 && radius <= std::numbers::pi / 2))
            throw ConfigError("projective_cap radius must lie in (0, pi/2]");
        Event e;
        const auto m = static_cast<double>(center.size());
        e.mass_ = center.size() == 1
                      ? 1.0
                      : boost::math::ibetac(0.5, (m - 1.0) / 2.0, std::cos(radius) * std::cos(radius));
        e.kind_ = event::ProjectiveCap{center.normalized(), radius};
        return e;
    }

    [[nodiscard]] const Kind& kind() const noexcept { return kind_; }
    [[nodiscard]] double exact_mass() const noexcept { return mass_; }
    [[nodiscard]] bool is_full() const noexcept { return std::holds_alternative<event::FullSpace>(kind_); }
    [[nodiscard]] bool is_projective() const noexcept
    {
        return std::holds_alternative<event::ProjectiveCap>(kind_);
    }

    // Membership of a base point; projective caps contain every base point.
    [[nodiscard]] bool contains(const Point& x) const
    {
        if (const auto* box = std::get_if<event::TorusBox>(&kind_)) {
            const auto* t = std::get_if<TorusPoint>(&x);
            if (!t || t->dim() != dim_)
                throw TypeError("torus_box membership needs a torus point of matching dimension");
            for (std::size_t i = 0; i < dim_; ++i) {
                const double c = t->coord(i);
                if (c < box->lower[i] || !(c < box->upper[i]))
                    return false;
            }
            return true;
        }
        if (const auto* cyl = std::get_if<event::ShiftCylinder>(&kind_)) {
            const auto* s = std::get_if<SymbolicPoint>(&x);
            if (!s)
                throw TypeError("shift_cylinder membership needs a symbolic point");
            for (std::size_t j = 0; j < cyl->symbols.size(); ++j)
                if (s->coordinate(cyl->first + static_cast<std::int64_t>(j)) != cyl->symbols[j])
                    return false;
            return true;
        }
        return true;
    }

    // Membership of a direction; base events contain every direction.
    [[nodiscard]] bool contains_direction(const Vector& v) const
    {
        const auto* cap = std::get_if<event::ProjectiveCap>(&kind_);
        if (!cap)
            return true;
        if (v.size() != cap->center.size())
            throw TypeError("projective_cap dimension does not match the direction");
        return std::abs(cap->center.dot(v)) >= std::cos(cap->radius) * v.norm();
    }

    [[nodiscard]] std::string name() const
    {
        switch (kind_.index()) {
        case 0:
            return "full_space";
        case 1:
            return "torus_box";
        case 2:
            return "shift_cylinder";
        default:
            return "projective_cap";
        }
    }

  private:
    Kind kind_ = event::FullSpace{};
    double mass_ = 1.0;
    std::size_t dim_ = 0;
};

inline void require_positive_mass(const Event& e, const char* which)
{
    if (!(e.exact_mass() > 0.0))
        throw DegenerateEventError(std::string("event ") + which + " has zero exact mass");
}

//---------------------------------------------------------------------------//
// Sample sources: one draw of (x, v) and the raw functional at time N
//---------------------------------------------------------------------------//

struct Draw {
    Point x;
    Vector v;       // empty unless the source samples directions
    double raw = 0; // Birkhoff sum or sigma, before the scheme is applied
    Point end;      // T^N x
};

class BirkhoffSource {
  public:
    BirkhoffSource(PhaseSpaceSystem sys, Observable f) : sys_(std::move(sys)), f_(std::move(f)) {}

    [[nodiscard]] Draw draw(Stream& s, std::int64_t n) const
    {
        Point x = sample_measure(sys_, s);
        OrbitSum o = birkhoff_walk(sys_, f_, x, n, +1);
        return {std::move(x), Vector{}, o.sum, std::move(o.end)};
    }

    [[nodiscard]] const PhaseSpaceSystem& base() const noexcept { return sys_; }
    [[nodiscard]] bool has_direction() const noexcept { return false; }
    [[nodiscard]] static std::string value_name() { return "S_N"; }

  private:
    PhaseSpaceSystem sys_;
    Observable f_;
};

// sigma(x, v, N) with v ~ nu, sigma(x, N), or sigma(x, s(x), N) under mu (x) nu.
class CocycleSource {
  public:
    enum class Mode { vector, norm, section };

    static CocycleSource vector(MatrixCocycle coc) { return {std::move(coc), Mode::vector, std::nullopt}; }
    static CocycleSource norm(MatrixCocycle coc) { return {std::move(coc), Mode::norm, std::nullopt}; }
    static CocycleSource section(MatrixCocycle coc, Section s)
    {
        if (s.dimension() != coc.dimension())
            throw ConfigError("section dimension does not match the cocycle");
        return {std::move(coc), Mode::section, std::move(s)};
    }

    [[nodiscard]] Draw draw(Stream& s, std::int64_t n) const
    {
        Draw d;
        d.x = sample_measure(coc_.base(), s);
        switch (mode_) {
        case Mode::vector:
            d.v = ProjectiveSampler(coc_.dimension()).sample(s);
            d.raw = sigma_vec(coc_, d.x, d.v, n);
            break;
        case Mode::norm:
            d.raw = sigma_norm(coc_, d.x, n);
            break;
        case Mode::section:
            d.v = section_->at(d.x);
            d.raw = sigma_vec(coc_, d.x, d.v, n);
            break;
        }
        d.end = apply_map(coc_.base(), d.x, n);
        return d;
    }

    [[nodiscard]] const PhaseSpaceSystem& base() const noexcept { return coc_.base(); }
    [[nodiscard]] const MatrixCocycle& cocycle() const noexcept { return coc_; }
    [[nodiscard]] Mode mode() const noexcept { return mode_; }
    [[nodiscard]] bool has_direction() const noexcept { return mode_ != Mode::norm; }
    [[nodiscard]] static std::string value_name() { return "sigma"; }

  private:
    CocycleSource(MatrixCocycle coc, Mode mode, std::optional<Section> s)
        : coc_(std::move(coc)), mode_(mode), section_(std::move(s))
    {
    }

    MatrixCocycle coc_;
    Mode mode_;
    std::optional<Section> section_;
};

//---------------------------------------------------------------------------//
// Estimators
//---------------------------------------------------------------------------//

inline double default_tolerance(double std_error) { return std::max(0.02, 5.0 * std_error); }

inline double binomial_std_error(double p, std::size_t n)
{
    return n > 0 ? std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n)) : 0.0;
}

struct EstimateOptions {
    unsigned workers = 1;
    std::optional<double> tolerance;  // overrides max(0.02, 5 SE)
};

struct Estimate {
    std::int64_t n = 0;
    double estimate = 0.0;
    double target = 0.0;
    double deviation = 0.0;
    double std_error = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::vector<double> samples;  // S_N by sample index, when collected

    void decide(std::optional<double> tol)
    {
        deviation = std::abs(estimate - target);
        tolerance = tol.value_or(default_tolerance(std_error));
        pass = deviation <= tolerance;
    }
};

struct PlainDltResult {
    std::vector<Estimate> per_n;          // estimate: KS distance, or interval mass when an interval is given
    std::vector<double> ks;               // KS distance at each N
    std::optional<Interval> interval;
    std::string trend;                    // "nonincreasing" or "not monotone"
    [[nodiscard]] bool pass() const
    {
        return std::all_of(per_n.begin(), per_n.end(), [](const Estimate& e) { return e.pass; });
    }
};

namespace detail {

template <typename Source>
std::vector<Draw> draw_all(const Source& src, std::int64_t n, std::size_t n_samples, const Stream& stream,
                           unsigned workers)
{
    return parallel_map(n_samples, workers, [&](std::size_t i) {
        Stream s = stream.split(i);
        return src.draw(s, n);
    });
}

template <typename Source>
std::vector<double> normalized_values(const Source& src, const NormalizingScheme& scheme, std::int64_t n,
                                      std::size_t n_samples, const Stream& stream, unsigned workers)
{
    return parallel_map(n_samples, workers, [&](std::size_t i) {
        Stream s = stream.split(i);
        return scheme.normalize(src.draw(s, n).raw, n);
    });
}

inline void check_samples(std::size_t n_samples, std::size_t minimum = 1)
{
    if (n_samples < minimum)
        throw DomainError("estimator needs at least " + std::to_string(minimum) + " samples");
}

}  // namespace detail

/*!
 * Empirical law of S_N for every N in `n_list` against scheme.law().
 * Without an interval the estimate is the KS distance (target 0, SE taken
 * as 1/(2 sqrt n)); with an interval it is the mass of S_N in (a, b)
 * against P(S in (a, b)).
 */
template <typename Source>
PlainDltResult estimate_plain_dlt(const Source& src, const NormalizingScheme& scheme,
                                  const std::vector<std::int64_t>& n_list, std::size_t n_samples,
                                  const Stream& stream, std::optional<Interval> interval = std::nullopt,
                                  EstimateOptions options = {})
{
    detail::check_samples(n_samples, 100);
    if (n_list.empty())
        throw ConfigError("plain DLT needs at least one N");
    double target_mass = 0.0;
    if (interval)
        target_mass = law_mass(scheme.law(), *interval);
    PlainDltResult out;
    out.interval = interval;
    for (std::int64_t n : n_list) {
        Estimate e;
        e.n = n;
        e.samples = detail::normalized_values(src, scheme, n, n_samples, stream, options.workers);
        EmpiricalDistribution emp(e.samples);
        const double ks = ks_distance(emp, scheme.law());
        out.ks.push_back(ks);
        if (interval) {
            std::size_t hits = 0;
            for (double s : e.samples)
                hits += interval->contains(s) ? 1 : 0;
            e.estimate = static_cast<double>(hits) / static_cast<double>(n_samples);
            e.target = target_mass;
            e.std_error = binomial_std_error(e.estimate, n_samples);
        } else {
            e.estimate = ks;
            e.target = 0.0;
            e.std_error = 0.5 / std::sqrt(static_cast<double>(n_samples));
        }
        e.decide(options.tolerance);
        out.per_n.push_back(std::move(e));
    }
    out.trend = "nonincreasing";
    for (std::size_t i = 1; i < out.ks.size(); ++i)
        if (out.ks[i] > out.ks[i - 1] + out.per_n[i].std_error)
            out.trend = "not monotone";
    return out;
}

struct EventDltResult {
    Estimate estimate;
    double mass_a = 1.0;
    double mass_b = 1.0;
    double law_mass = 0.0;
    bool hypotheses_verifiable = true;  // false when the base lacks a companion map
};

namespace detail {

inline void check_event_for(const Event& e, bool has_direction, bool initial)
{
    if (e.is_projective() && !initial)
        throw ConfigError("projective_cap events are only supported for the initial event A");
    if (e.is_projective() && !has_direction)
        throw ConfigError("projective_cap event needs a direction-sampling source");
}

template <typename Source>
EventDltResult event_dlt(const Source& src, const NormalizingScheme& scheme, const Event& a, const Event* b,
                         const Interval& interval, std::int64_t n, std::size_t n_samples, const Stream& stream,
                         EstimateOptions options)
{
    check_samples(n_samples);
    require_positive_mass(a, "A");
    check_event_for(a, src.has_direction(), true);
    if (b) {
        require_positive_mass(*b, "B");
        check_event_for(*b, src.has_direction(), false);
    }
    EventDltResult out;
    out.law_mass = law_mass(scheme.law(), interval);
    out.mass_a = a.exact_mass();
    out.mass_b = b ? b->exact_mass() : 1.0;
    struct Row {
        double value;
        bool hit;
    };
    auto rows = parallel_map(n_samples, options.workers, [&](std::size_t i) {
        Stream s = stream.split(i);
        Draw d = src.draw(s, n);
        const double value = scheme.normalize(d.raw, n);
        bool hit = interval.contains(value) && a.contains(d.x) && a.contains_direction(d.v);
        if (b)
            hit = hit && b->contains(d.end);
        return Row{value, hit};
    });
    Estimate& e = out.estimate;
    e.n = n;
    std::size_t hits = 0;
    e.samples.reserve(rows.size());
    for (const auto& r : rows) {
        hits += r.hit ? 1 : 0;
        e.samples.push_back(r.value);
    }
    e.estimate = static_cast<double>(hits) / static_cast<double>(n_samples);
    e.target = out.mass_a * out.law_mass * out.mass_b;
    e.std_error = binomial_std_error(e.estimate, n_samples);
    e.decide(options.tolerance);
    return out;
}

}  // namespace detail

// mu(x in A, S_N(x) in (a, b)) against mu(A) P(S in (a, b)).
template <typename Source>
EventDltResult estimate_conditional_dlt(const Source& src, const NormalizingScheme& scheme, const Event& a,
                                        const Interval& interval, std::int64_t n, std::size_t n_samples,
                                        const Stream& stream, EstimateOptions options = {})
{
    return detail::event_dlt(src, scheme, a, nullptr, interval, n, n_samples, stream, options);
}

// mu(x in A, S_N(x) in (a, b), T^N x in B) against mu(A) P(S in (a, b)) mu(B).
template <typename Source>
EventDltResult estimate_mixing_dlt(const Source& src, const NormalizingScheme& scheme, const Event& a,
                                   const Event& b, const Interval& interval, std::int64_t n, std::size_t n_samples,
                                   const Stream& stream, EstimateOptions options = {})
{
    auto out = detail::event_dlt(src, scheme, a, &b, interval, n, n_samples, stream, options);
    out.hypotheses_verifiable = src.base().has_companion();
    return out;
}

// |mu(A and T^{-N} B) - mu(A) mu(B)| for each N.
inline std::vector<Estimate> estimate_mixing_correlation(const PhaseSpaceSystem& sys, const Event& a, const Event& b,
                                                         const std::vector<std::int64_t>& n_list,
                                                         std::size_t n_samples, const Stream& stream,
                                                         EstimateOptions options = {})
{
    detail::check_samples(n_samples);
    if (a.is_projective() || b.is_projective())
        throw ConfigError("mixing correlation takes base events only");
    std::vector<Estimate> out;
    for (std::int64_t n : n_list) {
        auto hits = parallel_map(n_samples, options.workers, [&](std::size_t i) {
            Stream s = stream.split(i);
            const Point x = sample_measure(sys, s);
            return static_cast<unsigned char>(a.contains(x) && b.contains(apply_map(sys, x, n)));
        });
        Estimate e;
        e.n = n;
        std::size_t count = 0;
        for (auto h : hits)
            count += h;
        e.estimate = static_cast<double>(count) / static_cast<double>(n_samples);
        e.target = a.exact_mass() * b.exact_mass();
        e.std_error = binomial_std_error(e.estimate, n_samples);
        e.decide(options.tolerance);
        out.push_back(std::move(e));
    }
    return out;
}

// Test function phi for the characteristic-function estimator.
using Weight = std::variant<Event, Observable>;

struct CharFnResult {
    std::int64_t n = 0;
    double t = 0.0;
    std::complex<double> estimate;
    std::complex<double> target;
    double se_real = 0.0;
    double se_imag = 0.0;
    double phi_mean = 0.0;      // Monte Carlo mean of phi(T^N x)
    double phi_exact = 0.0;     // mu(phi)
    double deviation = 0.0;     // |estimate - target|
    double tolerance = 0.0;
    bool pass = false;
};

// E[exp(i t S_N) phi(T^N x)] against E[exp(i t S)] mu(phi).
template <typename Source>
CharFnResult char_fn_estimate(const Source& src, const NormalizingScheme& scheme, double t, const Weight& weight,
                              std::int64_t n, std::size_t n_samples, const Stream& stream,
                              EstimateOptions options = {})
{
    detail::check_samples(n_samples);
    if (!(std::abs(t) <= 100.0))
        throw DomainError("char_fn_estimate needs |t| <= 100");
    double phi_exact = 0.0;
    if (const auto* e = std::get_if<Event>(&weight)) {
        if (e->is_projective())
            throw ConfigError("char_fn weight must be a base event or observable");
        phi_exact = e->exact_mass();
    } else {
        phi_exact = std::get<Observable>(weight).exact_mean();
    }
    struct Row {
        double re, im, phi;
    };
    auto rows = parallel_map(n_samples, options.workers, [&](std::size_t i) {
        Stream s = stream.split(i);
        Draw d = src.draw(s, n);
        const double value = scheme.normalize(d.raw, n);
        double phi = 0.0;
        if (const auto* e = std::get_if<Event>(&weight))
            phi = e->contains(d.end) ? 1.0 : 0.0;
        else
            phi = std::get<Observable>(weight)(d.end);
        return Row{std::cos(t * value) * phi, std::sin(t * value) * phi, phi};
    });
    RunningMoments re, im;
    CompensatedSum re_sum, im_sum, phi_sum;
    for (const auto& r : rows) {
        re.add(r.re);
        im.add(r.im);
        re_sum += r.re;
        im_sum += r.im;
        phi_sum += r.phi;
    }
    const auto count = static_cast<double>(n_samples);
    CharFnResult out;
    out.n = n;
    out.t = t;
    out.estimate = {re_sum.value() / count, im_sum.value() / count};
    out.target = scheme.law().characteristic(t) * phi_exact;
    out.se_real = re.std_error();
    out.se_imag = im.std_error();
    out.phi_mean = phi_sum.value() / count;
    out.phi_exact = phi_exact;
    out.deviation = std::abs(out.estimate - out.target);
    out.tolerance = options.tolerance.value_or(default_tolerance(std::hypot(out.se_real, out.se_imag)));
    out.pass = out.deviation <= out.tolerance;
    return out;
}

struct GreenKuboResult {
    double variance = 0.0;       // clamped at 0
    double raw_variance = 0.0;   // before clamping
    double var_f = 0.0;          // lag-0 term
    std::vector<double> covariances;  // lags 1..lag_max
    double tail = 0.0;           // 2 * sum of covariances over lags in (0.9 lag_max, lag_max]
    bool tail_ok = true;
    bool clamped = false;
    std::string advisory;
};

/*!
 * V = Var(f) + 2 sum_{n=1}^{L} Cov(f, f o T^n), each covariance averaged over
 * all pairs (j, j+n) in orbit windows of length `window` started at
 * mu-distributed points, centering by the exact mean of f.
 */
inline GreenKuboResult variance_green_kubo(const PhaseSpaceSystem& sys, const Observable& f, std::size_t lag_max,
                                           std::size_t n_samples, const Stream& stream, unsigned workers = 1,
                                           std::size_t window = 0)
{
    detail::check_samples(n_samples);
    if (lag_max < 1 || lag_max > 1000)
        throw DomainError("Green-Kubo lag_max must lie in 1..1000");
    if (window == 0)
        window = std::max<std::size_t>(2 * lag_max, 64);
    const double mean = f.exact_mean();
    auto rows = parallel_map(n_samples, workers, [&](std::size_t i) {
        Stream s = stream.split(i);
        Point x = sample_measure(sys, s);
        std::vector<double> g;
        g.reserve(window + lag_max);
        if (auto* t = std::get_if<TorusPoint>(&x)) {
            for (std::size_t k = 0; k < window + lag_max; ++k) {
                g.push_back(f.on_torus(*t) - mean);
                sys.step(*t);
            }
        } else {
            const auto& sp = std::get<SymbolicPoint>(x);
            for (std::size_t k = 0; k < window + lag_max; ++k)
                g.push_back(f(Point{sp.shifted(static_cast<std::int64_t>(k))}) - mean);
        }
        std::vector<double> c(lag_max + 1, 0.0);
        for (std::size_t lag = 0; lag <= lag_max; ++lag) {
            CompensatedSum acc;
            for (std::size_t j = 0; j < window; ++j)
                acc += g[j] * g[j + lag];
            c[lag] = acc.value() / static_cast<double>(window);
        }
        return c;
    });
    std::vector<CompensatedSum> sums(lag_max + 1);
    for (const auto& row : rows)
        for (std::size_t lag = 0; lag <= lag_max; ++lag)
            sums[lag] += row[lag];
    GreenKuboResult out;
    const auto count = static_cast<double>(n_samples);
    out.var_f = sums[0].value() / count;
    CompensatedSum total;
    total += out.var_f;
    CompensatedSum tail;
    for (std::size_t lag = 1; lag <= lag_max; ++lag) {
        const double c = sums[lag].value() / count;
        out.covariances.push_back(c);
        total += 2.0 * c;
        if (10 * lag > 9 * lag_max)
            tail += 2.0 * c;
    }
    out.raw_variance = total.value();
    out.tail = tail.value();
    out.variance = std::max(0.0, out.raw_variance);
    out.clamped = out.raw_variance < 0.0;
    out.tail_ok = std::abs(out.tail) <= 0.01 * out.variance || (out.variance == 0.0 && out.tail == 0.0);
    if (out.clamped)
        out.advisory = "negative truncated sum clamped to 0";
    else if (!out.tail_ok)
        out.advisory = "last-decade lag contributions exceed 1% of V; increase lag_max";
    return out;
}

// Operator-norm and section versions of the plain DLT.
inline PlainDltResult operator_norm_dlt(const MatrixCocycle& coc, const NormalizingScheme& scheme,
                                        const std::vector<std::int64_t>& n_list, std::size_t n_samples,
                                        const Stream& stream, std::optional<Interval> interval = std::nullopt,
                                        EstimateOptions options = {})
{
    return estimate_plain_dlt(CocycleSource::norm(coc), scheme, n_list, n_samples, stream, interval, options);
}

inline PlainDltResult section_dlt(const MatrixCocycle& coc, const NormalizingScheme& scheme, const Section& section,
                                  const std::vector<std::int64_t>& n_list, std::size_t n_samples,
                                  const Stream& stream, std::optional<Interval> interval = std::nullopt,
                                  EstimateOptions options = {})
{
    return estimate_plain_dlt(CocycleSource::section(coc, section), scheme, n_list, n_samples, stream, interval,
                              options);
}

}  // namespace mixlt
