#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <variant>
#include <vector>

#include "mixlt/dynamics.hpp"
#include "mixlt/laws.hpp"
#include "mixlt/summation.hpp"

namespace mixlt {

namespace observable {
// cos(2 pi <k, x>) on the torus.
struct CoordinateCosine {
    std::vector<std::int64_t> frequency;
};
// The symbol x_index on the shift, read as a real number.
struct CoordinateSymbol {
    std::int64_t index = 0;
};
struct Constant {
    double value = 0.0;
};
}  // namespace observable

/*!
 * A bounded observable f with its declared sup bound, Lipschitz bound
 * (for the system's metric) and analytic mean.
 */
class Observable {
  public:
    using Kind = std::variant<observable::CoordinateCosine, observable::CoordinateSymbol, observable::Constant>;

    static Observable constant(double value)
    {
        Observable f;
        f.kind_ = observable::Constant{value};
        f.sup_bound_ = std::abs(value);
        f.lipschitz_bound_ = 0.0;
        f.exact_mean_ = value;
        return f;
    }

    static Observable coordinate_cosine(const PhaseSpaceSystem& sys, std::vector<std::int64_t> frequency)
    {
        if (!sys.is_torus() || frequency.size() != sys.dimension())
            throw ConfigError("coordinate_cosine needs a torus system and a frequency of matching dimension");
        double norm2 = 0;
        bool zero = true;
        for (auto k : frequency) {
            norm2 += static_cast<double>(k) * static_cast<double>(k);
            zero = zero && k == 0;
        }
        Observable f;
        f.kind_ = observable::CoordinateCosine{std::move(frequency)};
        f.sup_bound_ = 1.0;
        f.lipschitz_bound_ = 2.0 * std::numbers::pi * std::sqrt(norm2);
        f.exact_mean_ = zero ? 1.0 : 0.0;
        return f;
    }

    static Observable coordinate_symbol(const PhaseSpaceSystem& sys, std::int64_t index)
    {
        if (!sys.is_shift())
            throw ConfigError("coordinate_symbol needs a shift system");
        if (index < -60 || index > 60)
            throw ConfigError("coordinate_symbol index must lie in [-60, 60]");
        const int alphabet = sys.symbol_law()->alphabet_size();
        Observable f;
        f.kind_ = observable::CoordinateSymbol{index};
        f.sup_bound_ = alphabet - 1;
        f.lipschitz_bound_ = (alphabet - 1) * std::ldexp(1.0, static_cast<int>(std::abs(index)));
        f.exact_mean_ = sys.symbol_law()->mean_symbol();
        return f;
    }

    [[nodiscard]] const Kind& kind() const noexcept { return kind_; }
    [[nodiscard]] double sup_bound() const noexcept { return sup_bound_; }
    [[nodiscard]] double lipschitz_bound() const noexcept { return lipschitz_bound_; }
    [[nodiscard]] double exact_mean() const noexcept { return exact_mean_; }
    [[nodiscard]] bool is_constant() const noexcept
    {
        return std::holds_alternative<observable::Constant>(kind_);
    }

    [[nodiscard]] double on_torus(const TorusPoint& x) const
    {
        if (const auto* c = std::get_if<observable::CoordinateCosine>(&kind_)) {
            std::uint64_t phase = 0;
            const auto raw = x.raw();
            if (raw.size() != c->frequency.size())
                throw TypeError("observable dimension does not match the point");
            for (std::size_t i = 0; i < raw.size(); ++i)
                phase += static_cast<std::uint64_t>(c->frequency[i]) * raw[i];
            return std::cos(2.0 * std::numbers::pi * detail::signed_fraction(phase));
        }
        if (const auto* k = std::get_if<observable::Constant>(&kind_))
            return k->value;
        throw TypeError("symbolic observable evaluated on a torus point");
    }

    [[nodiscard]] double on_shift(const SymbolicPoint& x) const
    {
        if (const auto* s = std::get_if<observable::CoordinateSymbol>(&kind_))
            return static_cast<double>(x.coordinate(s->index));
        if (const auto* k = std::get_if<observable::Constant>(&kind_))
            return k->value;
        throw TypeError("torus observable evaluated on a symbolic point");
    }

    [[nodiscard]] double operator()(const Point& x) const
    {
        if (const auto* t = std::get_if<TorusPoint>(&x))
            return on_torus(*t);
        return on_shift(std::get<SymbolicPoint>(x));
    }

  private:
    Observable() = default;

    Kind kind_;
    double sup_bound_ = 0.0;
    double lipschitz_bound_ = 0.0;
    double exact_mean_ = 0.0;
};

//---------------------------------------------------------------------------//
// Normalizing schemes (A_N, V_N, S)
//---------------------------------------------------------------------------//

struct Averaging {
    enum class Kind { linear, zero, table };
    Kind kind = Kind::zero;
    double rate = 0.0;          // A_N = rate * N
    std::vector<double> table;  // table[N - 1] = A_N
};

struct Normalizing {
    enum class Kind { linear, sqrt, table };
    Kind kind = Kind::linear;
    std::vector<double> table;  // table[N - 1] = V_N
};

inline constexpr std::size_t kMaxSchemeTable = 1'000'000;

class NormalizingScheme {
  public:
    NormalizingScheme(Averaging averaging, Normalizing normalizing, ReferenceLaw law)
        : averaging_(std::move(averaging)), normalizing_(std::move(normalizing)), law_(std::move(law))
    {
        if (averaging_.table.size() > kMaxSchemeTable || normalizing_.table.size() > kMaxSchemeTable)
            throw SchemeError("custom scheme tables are limited to 10^6 entries");
        if (averaging_.kind == Averaging::Kind::table && averaging_.table.empty())
            throw SchemeError("averaging table is empty");
        if (normalizing_.kind == Normalizing::Kind::table) {
            if (normalizing_.table.empty())
                throw SchemeError("normalizing table is empty");
            for (double v : normalizing_.table)
                if (!(v > 0.0))
                    throw SchemeError("normalizing table entries must be positive");
        }
    }

    // Law of large numbers: A_N = rate N, V_N = N, S = delta_0.
    static NormalizingScheme lln(double rate)
    {
        return {Averaging{Averaging::Kind::linear, rate, {}}, Normalizing{Normalizing::Kind::linear, {}},
                ReferenceLaw::dirac_at_zero()};
    }

    // Central limit theorem: A_N = rate N, V_N = sqrt(N), S = N(0, variance).
    static NormalizingScheme clt(double rate, double variance)
    {
        return {Averaging{Averaging::Kind::linear, rate, {}}, Normalizing{Normalizing::Kind::sqrt, {}},
                ReferenceLaw::gaussian(variance)};
    }

    [[nodiscard]] double average(std::int64_t n) const
    {
        switch (averaging_.kind) {
        case Averaging::Kind::linear:
            return averaging_.rate * static_cast<double>(n);
        case Averaging::Kind::zero:
            return 0.0;
        case Averaging::Kind::table:
            if (n < 1 || static_cast<std::size_t>(n) > averaging_.table.size())
                throw SchemeError("averaging table does not cover N = " + std::to_string(n));
            return averaging_.table[static_cast<std::size_t>(n - 1)];
        }
        return 0.0;
    }

    [[nodiscard]] double normalizer(std::int64_t n) const
    {
        double v = 0.0;
        switch (normalizing_.kind) {
        case Normalizing::Kind::linear:
            v = static_cast<double>(n);
            break;
        case Normalizing::Kind::sqrt:
            v = std::sqrt(static_cast<double>(n));
            break;
        case Normalizing::Kind::table:
            if (n < 1 || static_cast<std::size_t>(n) > normalizing_.table.size())
                throw SchemeError("normalizing table does not cover N = " + std::to_string(n));
            v = normalizing_.table[static_cast<std::size_t>(n - 1)];
            break;
        }
        if (!(v > 0.0))
            throw SchemeError("V_N must be positive (N = " + std::to_string(n) + ")");
        return v;
    }

    [[nodiscard]] double normalize(double value, std::int64_t n) const
    {
        return (value - average(n)) / normalizer(n);
    }

    [[nodiscard]] const Averaging& averaging() const noexcept { return averaging_; }
    [[nodiscard]] const Normalizing& normalizing() const noexcept { return normalizing_; }
    [[nodiscard]] const ReferenceLaw& law() const noexcept { return law_; }

  private:
    Averaging averaging_;
    Normalizing normalizing_;
    ReferenceLaw law_;
};

//---------------------------------------------------------------------------//
// Birkhoff sums
//---------------------------------------------------------------------------//

inline constexpr std::int64_t kMaxBirkhoffLength = 100'000'000;

struct OrbitSum {
    double sum = 0.0;
    Point end;  // T^{direction * N} x
};

/*!
 * Sum_{n=0}^{N-1} f(T^{direction * n} x) with compensated summation,
 * together with the endpoint of the orbit.
 */
inline OrbitSum birkhoff_walk(const PhaseSpaceSystem& sys, const Observable& f, const Point& x,
                              std::int64_t n_steps, int direction = +1)
{
    if (n_steps < 0 || n_steps > kMaxBirkhoffLength)
        throw DomainError("Birkhoff length must lie in [0, 10^8]");
    CompensatedSum sum;
    if (const auto* t = std::get_if<TorusPoint>(&x)) {
        sys.check_dim(*t);
        TorusPoint y = *t;
        for (std::int64_t n = 0; n < n_steps; ++n) {
            sum += f.on_torus(y);
            sys.step_raw(y.raw(), direction);
        }
        return {sum.value(), std::move(y)};
    }
    const auto& s = std::get<SymbolicPoint>(x);
    if (!sys.is_shift())
        throw TypeError("symbolic point passed to a torus system");
    if (const auto* c = std::get_if<observable::CoordinateSymbol>(&f.kind())) {
        SymbolCursor cursor(s, c->index, direction);
        for (std::int64_t n = 0; n < n_steps; ++n)
            sum += static_cast<double>(cursor.next());
    } else {
        const double value = f.on_shift(s);
        for (std::int64_t n = 0; n < n_steps; ++n)
            sum += value;
    }
    return {sum.value(), s.shifted(direction * n_steps)};
}

inline double birkhoff_sum(const PhaseSpaceSystem& sys, const Observable& f, const Point& x, std::int64_t n)
{
    return birkhoff_walk(sys, f, x, n, +1).sum;
}

// S_N(x) = (sum_{n<N} f(T^n x) - A_N) / V_N
inline double corrected_sum(const PhaseSpaceSystem& sys, const Observable& f, const NormalizingScheme& scheme,
                            const Point& x, std::int64_t n)
{
    const double v = scheme.normalizer(n);
    return (birkhoff_sum(sys, f, x, n) - scheme.average(n)) / v;
}

// S_N^{-1}(x): the same normalization along T^{-1}. Satisfies
// S_N(x) = S_N^{-1}(T^{N-1} x).
inline double reversed_corrected_sum(const PhaseSpaceSystem& sys, const Observable& f,
                                     const NormalizingScheme& scheme, const Point& x, std::int64_t n)
{
    const double v = scheme.normalizer(n);
    return (birkhoff_walk(sys, f, x, n, -1).sum - scheme.average(n)) / v;
}

struct AdaptednessProfile {
    std::vector<double> partial_sums;  // sum_{n=0}^{N} |f(T^n U x) - f(T^n x)|, N = 0..N_max
    std::vector<double> ratios;        // partial_sums[N] / V_N, with V_0 read as V_1
};

inline AdaptednessProfile adaptedness_profile(const PhaseSpaceSystem& sys, const Observable& f, const Point& x,
                                              std::size_t n_max,
                                              const std::optional<NormalizingScheme>& scheme = std::nullopt)
{
    sys.require_companion();
    const auto* t = std::get_if<TorusPoint>(&x);
    if (!t)
        throw TypeError("adaptedness profile needs a torus point");
    sys.check_dim(*t);
    const bool closed_form = std::holds_alternative<companion::StableTranslation>(*sys.companion());

    AdaptednessProfile out;
    out.partial_sums.reserve(n_max + 1);
    TorusPoint y = *t;
    TorusPoint z = std::get<TorusPoint>(apply_companion(sys, x));
    CompensatedSum total;
    for (std::size_t n = 0; n <= n_max; ++n) {
        if (closed_form)
            z = companion_orbit_point(sys, y, static_cast<std::int64_t>(n));
        total += std::abs(f.on_torus(z) - f.on_torus(y));
        out.partial_sums.push_back(total.value());
        sys.step(y);
        if (!closed_form)
            sys.step(z);
    }
    if (scheme) {
        out.ratios.reserve(out.partial_sums.size());
        for (std::size_t n = 0; n < out.partial_sums.size(); ++n)
            out.ratios.push_back(out.partial_sums[n] /
                                 scheme->normalizer(static_cast<std::int64_t>(std::max<std::size_t>(n, 1))));
    }
    return out;
}

}  // namespace mixlt
