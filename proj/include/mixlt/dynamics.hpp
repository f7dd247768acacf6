#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "mixlt/error.hpp"
#include "mixlt/rng.hpp"

namespace mixlt {

using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

namespace detail {

// Torus coordinates live on the lattice 2^-64 Z / Z, stored as uint64.
// Integer automorphisms and translations then act exactly (mod 2^64).
inline std::uint64_t to_fixed(double c)
{
    if (!std::isfinite(c))
        throw DomainError("torus coordinate is not finite");
    long double frac = static_cast<long double>(c) - std::floor(static_cast<long double>(c));
    long double scaled = std::nearbyint(frac * 0x1.0p64L);
    if (scaled >= 0x1.0p64L)
        scaled -= 0x1.0p64L;
    return static_cast<std::uint64_t>(scaled);
}

inline double from_fixed(std::uint64_t v) noexcept { return to_unit(v); }

// Representative of a lattice difference in [-1/2, 1/2).
inline double signed_fraction(std::uint64_t diff) noexcept
{
    return static_cast<double>(static_cast<std::int64_t>(diff)) * 0x1.0p-64;
}

inline bool add_overflows(std::int64_t a, std::int64_t b, std::int64_t& out) noexcept
{
    return __builtin_add_overflow(a, b, &out);
}

}  // namespace detail

//---------------------------------------------------------------------------//
// Points
//---------------------------------------------------------------------------//

class TorusPoint {
  public:
    TorusPoint() = default;
    explicit TorusPoint(std::vector<std::uint64_t> fixed) : fixed_(std::move(fixed)) {}

    // Coordinates are reduced modulo 1.
    static TorusPoint from_coords(std::span<const double> coords)
    {
        std::vector<std::uint64_t> fixed(coords.size());
        std::transform(coords.begin(), coords.end(), fixed.begin(), detail::to_fixed);
        return TorusPoint(std::move(fixed));
    }
    static TorusPoint from_coords(std::initializer_list<double> coords)
    {
        return from_coords(std::span<const double>(coords.begin(), coords.size()));
    }

    [[nodiscard]] std::size_t dim() const noexcept { return fixed_.size(); }
    [[nodiscard]] double coord(std::size_t i) const { return detail::from_fixed(fixed_[i]); }
    [[nodiscard]] std::vector<double> coords() const
    {
        std::vector<double> out(fixed_.size());
        std::transform(fixed_.begin(), fixed_.end(), out.begin(), detail::from_fixed);
        return out;
    }
    [[nodiscard]] std::span<const std::uint64_t> raw() const noexcept { return fixed_; }
    [[nodiscard]] std::span<std::uint64_t> raw() noexcept { return fixed_; }

    friend bool operator==(const TorusPoint&, const TorusPoint&) = default;

  private:
    std::vector<std::uint64_t> fixed_;
};

// Discrete law on {0, ..., k-1} sampled from 64 uniform bits.
class SymbolLaw {
  public:
    explicit SymbolLaw(std::vector<double> weights) : weights_(std::move(weights))
    {
        if (weights_.empty())
            throw ConfigError("symbol weights must be nonempty");
        long double total = 0;
        for (double w : weights_) {
            if (!(w > 0.0) || !std::isfinite(w))
                throw ConfigError("symbol weights must be strictly positive");
            total += w;
        }
        if (std::abs(static_cast<double>(total) - 1.0) > 1e-12)
            throw ConfigError("symbol weights must sum to 1 (within 1e-12)");
        long double cumulative = 0;
        for (std::size_t s = 0; s + 1 < weights_.size(); ++s) {
            cumulative += weights_[s];
            cutoffs_.push_back(static_cast<std::uint64_t>(
                std::min<long double>(cumulative * 0x1.0p64L, 0x1.0p64L - 1)));
        }
    }

    [[nodiscard]] int symbol_for(std::uint64_t bits) const noexcept
    {
        const auto it = std::upper_bound(cutoffs_.begin(), cutoffs_.end(), bits);
        return static_cast<int>(it - cutoffs_.begin());
    }

    [[nodiscard]] int alphabet_size() const noexcept { return static_cast<int>(weights_.size()); }
    [[nodiscard]] const std::vector<double>& weights() const noexcept { return weights_; }

    [[nodiscard]] double mean_symbol() const noexcept
    {
        double m = 0;
        for (std::size_t s = 0; s < weights_.size(); ++s)
            m += static_cast<double>(s) * weights_[s];
        return m;
    }

    friend bool operator==(const SymbolLaw& a, const SymbolLaw& b) { return a.weights_ == b.weights_; }

  private:
    std::vector<double> weights_;
    std::vector<std::uint64_t> cutoffs_;
};

/*!
 * A point of the two-sided shift: the bi-infinite sequence
 * k -> symbol(seed, offset + k), evaluated lazily.
 *
 * Shifting changes only the offset, so T and T^{-1} are exact.
 */
class SymbolicPoint {
  public:
    SymbolicPoint(std::uint64_t seed, std::int64_t offset, std::shared_ptr<const SymbolLaw> law)
        : seed_(seed), offset_(offset), law_(std::move(law))
    {
        if (!law_)
            throw ConfigError("symbolic point needs a symbol law");
    }

    [[nodiscard]] int coordinate(std::int64_t k) const
    {
        std::int64_t index;
        if (detail::add_overflows(offset_, k, index))
            throw RangeError("symbolic coordinate index overflows");
        return symbol_at(index);
    }

    // Symbol at absolute index (offset already applied).
    [[nodiscard]] int symbol_at(std::int64_t index) const noexcept
    {
        const auto u = static_cast<std::uint64_t>(index);
        const auto block = Philox4x32::block(seed_, u >> 1, rng_domain::symbol);
        return law_->symbol_for(block[u & 1]);
    }

    [[nodiscard]] SymbolicPoint shifted(std::int64_t n) const
    {
        std::int64_t offset;
        if (detail::add_overflows(offset_, n, offset))
            throw RangeError("symbolic offset overflows");
        return SymbolicPoint(seed_, offset, law_);
    }

    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
    [[nodiscard]] std::int64_t offset() const noexcept { return offset_; }
    [[nodiscard]] int alphabet_size() const noexcept { return law_->alphabet_size(); }
    [[nodiscard]] const std::shared_ptr<const SymbolLaw>& law() const noexcept { return law_; }

    friend bool operator==(const SymbolicPoint& a, const SymbolicPoint& b)
    {
        return a.seed_ == b.seed_ && a.offset_ == b.offset_ && *a.law_ == *b.law_;
    }

  private:
    std::uint64_t seed_;
    std::int64_t offset_;
    std::shared_ptr<const SymbolLaw> law_;
};

// Sequential reader of x_k, x_{k+1}, ... that reuses each Philox block for
// two consecutive symbols. Used by the hot Birkhoff and cocycle loops.
class SymbolCursor {
  public:
    SymbolCursor(const SymbolicPoint& x, std::int64_t start_k, int direction = +1)
        : x_(&x), direction_(direction)
    {
        if (detail::add_overflows(x.offset(), start_k, index_))
            throw RangeError("symbolic coordinate index overflows");
    }

    int next() noexcept
    {
        const auto u = static_cast<std::uint64_t>(index_);
        if (!valid_ || (u >> 1) != block_index_) {
            block_index_ = u >> 1;
            block_ = Philox4x32::block(x_->seed(), block_index_, rng_domain::symbol);
            valid_ = true;
        }
        const int symbol = x_->law()->symbol_for(block_[u & 1]);
        index_ += direction_;
        return symbol;
    }

  private:
    const SymbolicPoint* x_;
    std::int64_t index_ = 0;
    int direction_;
    std::uint64_t block_index_ = 0;
    std::array<std::uint64_t, 2> block_{};
    bool valid_ = false;
};

using Point = std::variant<TorusPoint, SymbolicPoint>;

//---------------------------------------------------------------------------//
// Systems
//---------------------------------------------------------------------------//

struct TorusAutomorphism {
    IntMatrix matrix;
};
struct TwoSidedShift {
    std::vector<double> weights;
};
struct TorusTranslation {
    std::vector<double> vector;
};
using SystemKind = std::variant<TorusAutomorphism, TwoSidedShift, TorusTranslation>;

namespace companion {
// x + amplitude * v_s, v_s the unit stable eigenvector of the automorphism.
struct StableTranslation {
    double amplitude = 0.0;
};
struct Identity {};
struct Translation {
    std::vector<double> vector;
};
}  // namespace companion
using CompanionMap =
    std::variant<companion::StableTranslation, companion::Identity, companion::Translation>;

enum class MetricId { euclidean_torus, cylinder_2adic };

inline constexpr int kSymbolicHorizon = 64;
inline constexpr std::int64_t kMaxIterate = std::int64_t{1} << 40;

struct StableEigen {
    double eigenvalue = 0.0;
    std::vector<double> vector;  // unit length, first nonzero entry positive
};

namespace detail {

using FixedMatrix = std::vector<std::uint64_t>;  // row-major, arithmetic mod 2^64

inline FixedMatrix to_fixed_matrix(const IntMatrix& m)
{
    const auto d = static_cast<std::size_t>(m.rows());
    FixedMatrix out(d * d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            out[i * d + j] = static_cast<std::uint64_t>(m(static_cast<Eigen::Index>(i),
                                                          static_cast<Eigen::Index>(j)));
    return out;
}

inline FixedMatrix fixed_multiply(const FixedMatrix& a, const FixedMatrix& b, std::size_t d)
{
    FixedMatrix out(d * d, 0);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t k = 0; k < d; ++k)
            for (std::size_t j = 0; j < d; ++j)
                out[i * d + j] += a[i * d + k] * b[k * d + j];
    return out;
}

inline FixedMatrix fixed_power(FixedMatrix base, std::uint64_t n, std::size_t d)
{
    FixedMatrix result(d * d, 0);
    for (std::size_t i = 0; i < d; ++i)
        result[i * d + i] = 1;
    while (n) {
        if (n & 1)
            result = fixed_multiply(result, base, d);
        base = fixed_multiply(base, base, d);
        n >>= 1;
    }
    return result;
}

inline void fixed_apply(const FixedMatrix& m, std::span<std::uint64_t> x, std::size_t d)
{
    std::uint64_t buffer[16];
    std::vector<std::uint64_t> heap;
    std::uint64_t* tmp = buffer;
    if (d > 16) {
        heap.resize(d);
        tmp = heap.data();
    }
    for (std::size_t i = 0; i < d; ++i) {
        std::uint64_t acc = 0;
        for (std::size_t j = 0; j < d; ++j)
            acc += m[i * d + j] * x[j];
        tmp[i] = acc;
    }
    std::copy(tmp, tmp + d, x.begin());
}

// Exact determinant by fraction-free elimination (Bareiss).
inline __int128 integer_determinant(const IntMatrix& m)
{
    const Eigen::Index d = m.rows();
    std::vector<__int128> a(static_cast<std::size_t>(d * d));
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            a[static_cast<std::size_t>(i * d + j)] = m(i, j);
    auto at = [&](Eigen::Index i, Eigen::Index j) -> __int128& {
        return a[static_cast<std::size_t>(i * d + j)];
    };
    __int128 sign = 1, previous = 1;
    for (Eigen::Index k = 0; k + 1 < d; ++k) {
        if (at(k, k) == 0) {
            Eigen::Index swap = k + 1;
            while (swap < d && at(swap, k) == 0)
                ++swap;
            if (swap == d)
                return 0;
            for (Eigen::Index j = 0; j < d; ++j)
                std::swap(at(k, j), at(swap, j));
            sign = -sign;
        }
        for (Eigen::Index i = k + 1; i < d; ++i)
            for (Eigen::Index j = k + 1; j < d; ++j)
                at(i, j) = (at(i, j) * at(k, k) - at(i, k) * at(k, j)) / previous;
        previous = at(k, k);
    }
    return sign * at(d - 1, d - 1);
}

// Inverse of a unimodular integer matrix; exact, verified.
inline IntMatrix unimodular_inverse(const IntMatrix& m)
{
    const Eigen::MatrixXd inv = m.cast<double>().inverse();
    IntMatrix out(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            out(i, j) = static_cast<std::int64_t>(std::llround(inv(i, j)));
    if (m * out != IntMatrix::Identity(m.rows(), m.cols()))
        throw UnsupportedSystemError("torus matrix inverse is not representable exactly");
    return out;
}

}  // namespace detail

/*!
 * An invertible measure-preserving system (X, d, mu, T) with an optional
 * companion map U.
 *
 * Torus systems act on TorusPoint, the shift acts on SymbolicPoint. All
 * members are immutable after construction.
 */
class PhaseSpaceSystem {
  public:
    static PhaseSpaceSystem torus_automorphism(IntMatrix matrix,
                                               std::optional<CompanionMap> companion = {})
    {
        if (matrix.rows() != matrix.cols() || matrix.rows() < 1)
            throw ConfigError("torus matrix must be square and nonempty");
        const __int128 det = detail::integer_determinant(matrix);
        if (det != 1 && det != -1)
            throw ConfigError("torus matrix must have determinant +1 or -1");
        PhaseSpaceSystem sys;
        sys.dim_ = static_cast<std::size_t>(matrix.rows());
        sys.forward_ = detail::to_fixed_matrix(matrix);
        sys.backward_ = detail::to_fixed_matrix(detail::unimodular_inverse(matrix));
        sys.stable_ = find_stable(matrix);
        sys.kind_ = TorusAutomorphism{std::move(matrix)};
        sys.set_companion(std::move(companion));
        return sys;
    }

    static PhaseSpaceSystem torus_translation(std::vector<double> vector,
                                              std::optional<CompanionMap> companion = {})
    {
        if (vector.empty())
            throw ConfigError("translation vector must be nonempty");
        PhaseSpaceSystem sys;
        sys.dim_ = vector.size();
        sys.translation_.resize(vector.size());
        std::transform(vector.begin(), vector.end(), sys.translation_.begin(), detail::to_fixed);
        sys.kind_ = TorusTranslation{std::move(vector)};
        sys.set_companion(std::move(companion));
        return sys;
    }

    static PhaseSpaceSystem two_sided_shift(std::vector<double> weights)
    {
        PhaseSpaceSystem sys;
        sys.law_ = std::make_shared<const SymbolLaw>(weights);
        sys.kind_ = TwoSidedShift{std::move(weights)};
        sys.metric_ = MetricId::cylinder_2adic;
        return sys;
    }

    [[nodiscard]] const SystemKind& kind() const noexcept { return kind_; }
    [[nodiscard]] bool is_shift() const noexcept { return std::holds_alternative<TwoSidedShift>(kind_); }
    [[nodiscard]] bool is_torus() const noexcept { return !is_shift(); }
    [[nodiscard]] bool is_automorphism() const noexcept
    {
        return std::holds_alternative<TorusAutomorphism>(kind_);
    }
    // Torus dimension; 0 for the shift.
    [[nodiscard]] std::size_t dimension() const noexcept { return dim_; }
    [[nodiscard]] MetricId metric() const noexcept { return metric_; }
    [[nodiscard]] const std::optional<CompanionMap>& companion() const noexcept { return companion_; }
    [[nodiscard]] bool has_companion() const noexcept { return companion_.has_value(); }
    [[nodiscard]] const std::shared_ptr<const SymbolLaw>& symbol_law() const noexcept { return law_; }
    [[nodiscard]] const std::optional<StableEigen>& stable_eigen() const noexcept { return stable_; }

    // One forward (or backward) step in place; hot path for orbit loops.
    void step(TorusPoint& x) const noexcept { step_raw(x.raw(), +1); }
    void step_back(TorusPoint& x) const noexcept { step_raw(x.raw(), -1); }

    void step_raw(std::span<std::uint64_t> x, int direction) const noexcept
    {
        if (is_automorphism()) {
            if (dim_ == 2) {
                const auto& m = direction > 0 ? forward_ : backward_;
                const std::uint64_t a = m[0] * x[0] + m[1] * x[1];
                const std::uint64_t b = m[2] * x[0] + m[3] * x[1];
                x[0] = a;
                x[1] = b;
            } else {
                detail::fixed_apply(direction > 0 ? forward_ : backward_, x, dim_);
            }
        } else {
            for (std::size_t i = 0; i < dim_; ++i)
                x[i] += direction > 0 ? translation_[i] : std::uint64_t{0} - translation_[i];
        }
    }

    [[nodiscard]] TorusPoint advance(const TorusPoint& x, std::int64_t n) const
    {
        check_dim(x);
        TorusPoint out = x;
        if (is_automorphism()) {
            const auto steps = static_cast<std::uint64_t>(n >= 0 ? n : -n);
            if (steps <= 4) {
                for (std::uint64_t i = 0; i < steps; ++i)
                    step_raw(out.raw(), n >= 0 ? 1 : -1);
            } else {
                const auto power = detail::fixed_power(n >= 0 ? forward_ : backward_, steps, dim_);
                detail::fixed_apply(power, out.raw(), dim_);
            }
        } else {
            for (std::size_t i = 0; i < dim_; ++i)
                out.raw()[i] += static_cast<std::uint64_t>(n) * translation_[i];
        }
        return out;
    }

    void check_dim(const TorusPoint& x) const
    {
        if (is_shift())
            throw TypeError("torus point passed to a shift system");
        if (x.dim() != dim_)
            throw TypeError("torus point dimension does not match the system");
    }

    // Representative of (T^n U x - T^n x) mod Z^d. For translation-type
    // companions over affine maps this does not depend on x. The stable
    // translation uses the closed form amplitude * lambda_s^n * v_s, which
    // is the exact real displacement; lattice rounding would otherwise be
    // amplified along the unstable direction.
    [[nodiscard]] std::vector<double> companion_displacement(std::int64_t n) const
    {
        require_companion();
        std::vector<double> out(dim_, 0.0);
        std::visit(
            [&](const auto& c) {
                using C = std::decay_t<decltype(c)>;
                if constexpr (std::is_same_v<C, companion::StableTranslation>) {
                    const double scale = c.amplitude * std::pow(stable_->eigenvalue, static_cast<double>(n));
                    for (std::size_t i = 0; i < dim_; ++i)
                        out[i] = scale * stable_->vector[i];
                } else if constexpr (std::is_same_v<C, companion::Translation>) {
                    std::vector<std::uint64_t> delta = companion_fixed_;
                    if (is_automorphism()) {
                        const auto power = detail::fixed_power(n >= 0 ? forward_ : backward_,
                                                               static_cast<std::uint64_t>(n >= 0 ? n : -n), dim_);
                        detail::fixed_apply(power, delta, dim_);
                    }
                    for (std::size_t i = 0; i < dim_; ++i)
                        out[i] = detail::signed_fraction(delta[i]);
                }
            },
            *companion_);
        return out;
    }

    [[nodiscard]] TorusPoint translate(const TorusPoint& x, std::span<const double> displacement) const
    {
        check_dim(x);
        TorusPoint out = x;
        for (std::size_t i = 0; i < dim_; ++i) {
            // Two's-complement wrap of the rounded signed displacement.
            const long double scaled = std::nearbyint(static_cast<long double>(displacement[i]) * 0x1.0p64L);
            const long double frac = scaled - 0x1.0p64L * std::floor(scaled / 0x1.0p64L);
            out.raw()[i] += frac >= 0x1.0p64L ? 0 : static_cast<std::uint64_t>(frac);
        }
        return out;
    }

    void require_companion() const
    {
        if (!companion_)
            throw ConfigError("system has no companion map U");
    }

    [[nodiscard]] std::string describe() const
    {
        std::ostringstream os;
        std::visit(
            [&](const auto& k) {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, TorusAutomorphism>)
                    os << "torus_automorphism(d=" << dim_ << ")";
                else if constexpr (std::is_same_v<K, TwoSidedShift>)
                    os << "two_sided_shift(k=" << k.weights.size() << ")";
                else
                    os << "torus_translation(d=" << dim_ << ")";
            },
            kind_);
        return os.str();
    }

  private:
    PhaseSpaceSystem() = default;

    static std::optional<StableEigen> find_stable(const IntMatrix& matrix)
    {
        Eigen::EigenSolver<Eigen::MatrixXd> solver(matrix.cast<double>());
        std::optional<StableEigen> best;
        for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
            const std::complex<double> lambda = solver.eigenvalues()(i);
            if (std::abs(lambda.imag()) > 1e-12 || std::abs(lambda.real()) >= 1.0 - 1e-12)
                continue;
            if (best && std::abs(lambda.real()) <= std::abs(best->eigenvalue))
                continue;
            Eigen::VectorXd v = solver.eigenvectors().col(i).real();
            v.normalize();
            for (Eigen::Index j = 0; j < v.size(); ++j) {
                if (std::abs(v(j)) > 1e-14) {
                    if (v(j) < 0)
                        v = -v;
                    break;
                }
            }
            best = StableEigen{lambda.real(), std::vector<double>(v.data(), v.data() + v.size())};
        }
        return best;
    }

    void set_companion(std::optional<CompanionMap> companion)
    {
        if (!companion)
            return;
        if (const auto* s = std::get_if<companion::StableTranslation>(&*companion)) {
            if (!is_automorphism() || !stable_)
                throw UnsupportedSystemError(
                    "stable_translation needs a torus matrix with a real eigenvalue of modulus < 1");
            std::vector<double> delta(dim_);
            for (std::size_t i = 0; i < dim_; ++i)
                delta[i] = s->amplitude * stable_->vector[i];
            companion_fixed_.resize(dim_);
            std::transform(delta.begin(), delta.end(), companion_fixed_.begin(), detail::to_fixed);
        } else if (const auto* t = std::get_if<companion::Translation>(&*companion)) {
            if (t->vector.size() != dim_)
                throw ConfigError("companion translation has the wrong dimension");
            companion_fixed_.resize(dim_);
            std::transform(t->vector.begin(), t->vector.end(), companion_fixed_.begin(), detail::to_fixed);
        } else {
            companion_fixed_.assign(dim_, 0);
        }
        companion_ = std::move(companion);
    }

    SystemKind kind_;
    std::size_t dim_ = 0;
    MetricId metric_ = MetricId::euclidean_torus;
    std::optional<CompanionMap> companion_;
    std::shared_ptr<const SymbolLaw> law_;
    detail::FixedMatrix forward_, backward_;
    std::vector<std::uint64_t> translation_;
    std::vector<std::uint64_t> companion_fixed_;
    std::optional<StableEigen> stable_;

    friend Point apply_companion(const PhaseSpaceSystem&, const Point&);
};

//---------------------------------------------------------------------------//
// Operations
//---------------------------------------------------------------------------//

// T^n x, exact on both point types.
inline Point apply_map(const PhaseSpaceSystem& sys, const Point& x, std::int64_t n)
{
    if (n > kMaxIterate || n < -kMaxIterate)
        throw RangeError("iterate exceeds 2^40");
    if (const auto* t = std::get_if<TorusPoint>(&x))
        return sys.advance(*t, n);
    const auto& s = std::get<SymbolicPoint>(x);
    if (!sys.is_shift())
        throw TypeError("symbolic point passed to a torus system");
    return s.shifted(n);
}

inline Point apply_companion(const PhaseSpaceSystem& sys, const Point& x)
{
    sys.require_companion();
    const auto& t = std::get<TorusPoint>(x);
    sys.check_dim(t);
    TorusPoint out = t;
    for (std::size_t i = 0; i < sys.dim_; ++i)
        out.raw()[i] += sys.companion_fixed_[i];
    return out;
}

inline double torus_distance(const TorusPoint& x, const TorusPoint& y)
{
    if (x.dim() != y.dim())
        throw TypeError("torus points of different dimension");
    double sum = 0;
    for (std::size_t i = 0; i < x.dim(); ++i) {
        const double delta = detail::signed_fraction(x.raw()[i] - y.raw()[i]);
        sum += delta * delta;
    }
    return std::sqrt(sum);
}

// 2^{-min |k|} over disagreeing coordinates, 0 beyond the horizon.
inline double symbolic_distance(const SymbolicPoint& x, const SymbolicPoint& y)
{
    if (x.alphabet_size() != y.alphabet_size())
        throw TypeError("symbolic points over different alphabets");
    if (x == y)
        return 0.0;
    for (int k = 0; k <= kSymbolicHorizon; ++k) {
        if (x.coordinate(k) != y.coordinate(k) || x.coordinate(-k) != y.coordinate(-k))
            return std::ldexp(1.0, -k);
    }
    return 0.0;
}

inline double distance(const PhaseSpaceSystem& sys, const Point& x, const Point& y)
{
    if (x.index() != y.index())
        throw TypeError("points from different spaces");
    if (const auto* tx = std::get_if<TorusPoint>(&x)) {
        sys.check_dim(*tx);
        return torus_distance(*tx, std::get<TorusPoint>(y));
    }
    if (!sys.is_shift())
        throw TypeError("symbolic point passed to a torus system");
    return symbolic_distance(std::get<SymbolicPoint>(x), std::get<SymbolicPoint>(y));
}

inline Point sample_measure(const PhaseSpaceSystem& sys, Stream& stream)
{
    if (sys.is_shift())
        return SymbolicPoint(stream.next_u64(), 0, sys.symbol_law());
    std::vector<std::uint64_t> fixed(sys.dimension());
    for (auto& c : fixed)
        c = stream.next_u64();
    return TorusPoint(std::move(fixed));
}

// T^n U x for a torus point y = T^n x, using the exact displacement.
inline TorusPoint companion_orbit_point(const PhaseSpaceSystem& sys, const TorusPoint& tn_x, std::int64_t n)
{
    const auto displacement = sys.companion_displacement(n);
    return sys.translate(tn_x, displacement);
}

struct ContractionProfile {
    std::vector<double> distances;  // d(T^n U x, T^n x), n = 0..n_max
    std::size_t window = 0;         // leading run with distance > 1e-12
    std::optional<double> slope;    // least-squares slope of log distance over the window
};

// Least-squares slope of log(values[i]) against i for i < window.
inline std::optional<double> log_slope(std::span<const double> values, std::size_t window)
{
    if (window < 2)
        return std::nullopt;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < window; ++i) {
        const double x = static_cast<double>(i);
        const double y = std::log(values[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(window);
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline ContractionProfile contraction_profile(const PhaseSpaceSystem& sys, const Point& x, std::size_t n_max)
{
    sys.require_companion();
    if (n_max > 10000)
        throw DomainError("contraction profile supports n_max <= 10^4");
    if (!std::holds_alternative<TorusPoint>(x))
        throw TypeError("contraction profile needs a torus point");
    sys.check_dim(std::get<TorusPoint>(x));
    ContractionProfile out;
    out.distances.reserve(n_max + 1);
    for (std::size_t n = 0; n <= n_max; ++n) {
        const auto delta = sys.companion_displacement(static_cast<std::int64_t>(n));
        double sum = 0;
        for (double c : delta) {
            const double reduced = c - std::nearbyint(c);
            sum += reduced * reduced;
        }
        out.distances.push_back(std::sqrt(sum));
    }
    while (out.window < out.distances.size() && out.distances[out.window] > 1e-12)
        ++out.window;
    out.slope = log_slope(out.distances, out.window);
    return out;
}

}  // namespace mixlt
