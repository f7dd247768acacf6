#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "mixlt/dynamics.hpp"
#include "mixlt/parallel.hpp"
#include "mixlt/rng.hpp"
#include "mixlt/summation.hpp"

namespace mixlt {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kMaxConditionNumber = 1e12;
inline constexpr int kDefaultRenormPeriod = 32;
inline constexpr std::int64_t kMaxRawProduct = 1'000'000;

inline double operator_norm(const Matrix& m)
{
    if (m.rows() == 1)
        return std::abs(m(0, 0));
    return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

inline double condition_number(const Matrix& m)
{
    const Vector s = Eigen::JacobiSVD<Matrix>(m).singularValues();
    const double smallest = s(s.size() - 1);
    return smallest > 0 ? s(0) / smallest : std::numeric_limits<double>::infinity();
}

// max(log ||A||, log ||A^{-1}||)
inline double log_norm_of(const Matrix& m)
{
    const Vector s = Eigen::JacobiSVD<Matrix>(m).singularValues();
    return std::max(std::log(s(0)), -std::log(s(s.size() - 1)));
}

//---------------------------------------------------------------------------//
// Exterior powers
//---------------------------------------------------------------------------//

// k-subsets of {0..m-1} in lexicographic order.
inline std::vector<std::vector<int>> wedge_basis(int m, int k)
{
    std::vector<std::vector<int>> out;
    std::vector<int> current(static_cast<std::size_t>(k));
    std::iota(current.begin(), current.end(), 0);
    if (k == 0 || k > m)
        return out;
    while (true) {
        out.push_back(current);
        int i = k - 1;
        while (i >= 0 && current[static_cast<std::size_t>(i)] == m - k + i)
            --i;
        if (i < 0)
            break;
        ++current[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j)
            current[static_cast<std::size_t>(j)] = current[static_cast<std::size_t>(j - 1)] + 1;
    }
    return out;
}

// Lambda^k A on the lexicographic wedge basis: entry (I, J) is the minor det A[I, J].
inline Matrix wedge_matrix(const Matrix& a, int k)
{
    const int m = static_cast<int>(a.rows());
    const auto basis = wedge_basis(m, k);
    const auto n = static_cast<Eigen::Index>(basis.size());
    Matrix out(n, n);
    Matrix minor(k, k);
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c < n; ++c) {
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j)
                    minor(i, j) = a(basis[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)],
                                    basis[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)]);
            out(r, c) = minor.determinant();
        }
    }
    return out;
}

//---------------------------------------------------------------------------//
// Generators x -> C(x, 1)
//---------------------------------------------------------------------------//

struct TrigTerm {
    enum class Wave { cos, sin };
    Wave wave = Wave::cos;
    std::vector<std::int64_t> frequency;
    Matrix coefficient;
};

class CocycleGenerator;

namespace generator {
struct Constant {
    Matrix matrix;
    Matrix inverse;
};
// A(x) = matrices[x_0]
struct SymbolTable {
    std::vector<Matrix> matrices;
    std::vector<Matrix> inverses;
};
// A(x) = base + sum_j wave_j(2 pi <k_j, x>) C_j
struct SmoothTorus {
    Matrix base;
    std::vector<TrigTerm> terms;
};
// Lambda^k of a generator that has no closed table form.
struct ExteriorPowerOf {
    std::shared_ptr<const CocycleGenerator> parent;
    int k = 1;
};
}  // namespace generator

class CocycleGenerator {
  public:
    using Kind = std::variant<generator::Constant, generator::SymbolTable, generator::SmoothTorus,
                              generator::ExteriorPowerOf>;

    static CocycleGenerator constant(Matrix m)
    {
        check_matrix(m);
        CocycleGenerator g;
        g.dim_ = static_cast<int>(m.rows());
        g.log_norm_bound_ = log_norm_of(m);
        Matrix inv = m.inverse();
        g.kind_ = generator::Constant{std::move(m), std::move(inv)};
        return g;
    }

    static CocycleGenerator symbol_table(std::vector<Matrix> matrices)
    {
        if (matrices.empty())
            throw ConfigError("symbol_table needs at least one matrix");
        CocycleGenerator g;
        g.dim_ = static_cast<int>(matrices.front().rows());
        std::vector<Matrix> inverses;
        for (const auto& m : matrices) {
            check_matrix(m);
            if (m.rows() != g.dim_)
                throw ConfigError("symbol_table matrices must share one dimension");
            g.log_norm_bound_ = std::max(g.log_norm_bound_, log_norm_of(m));
            inverses.push_back(m.inverse());
        }
        g.kind_ = generator::SymbolTable{std::move(matrices), std::move(inverses)};
        return g;
    }

    // `declared_bound`, if given, replaces the sampled bound on log ||A^{-1}||.
    static CocycleGenerator smooth_torus(Matrix base, std::vector<TrigTerm> terms,
                                         std::optional<double> declared_bound = std::nullopt)
    {
        if (base.rows() != base.cols() || base.rows() < 1)
            throw ConfigError("smooth_torus base matrix must be square");
        std::size_t torus_dim = 0;
        double forward = operator_norm(base);
        for (const auto& t : terms) {
            if (t.coefficient.rows() != base.rows() || t.coefficient.cols() != base.cols())
                throw ConfigError("smooth_torus coefficient has the wrong shape");
            if (torus_dim == 0)
                torus_dim = t.frequency.size();
            if (t.frequency.size() != torus_dim || torus_dim == 0)
                throw ConfigError("smooth_torus frequencies must share one nonzero dimension");
            forward += operator_norm(t.coefficient);
        }
        CocycleGenerator g;
        g.dim_ = static_cast<int>(base.rows());
        g.torus_dim_ = torus_dim;
        g.kind_ = generator::SmoothTorus{std::move(base), std::move(terms)};
        // ||A(x)|| is bounded by the triangle inequality; ||A(x)^{-1}|| is
        // scanned on a deterministic sample with a 5% margin in log scale.
        double inverse_log = 0.0;
        Stream scan(0x5ca11ab1eull);
        Matrix a;
        const std::size_t n_scan = torus_dim == 0 ? 1 : 4096;
        for (std::size_t i = 0; i < n_scan; ++i) {
            std::vector<std::uint64_t> coords(std::max<std::size_t>(torus_dim, 1));
            for (auto& c : coords)
                c = scan.next_u64();
            g.evaluate_smooth(TorusPoint(coords), a);
            const double cond = condition_number(a);
            if (!(cond <= kMaxConditionNumber))
                throw ConfigError("smooth_torus generator is singular or has condition number > 1e12");
            const Vector s = Eigen::JacobiSVD<Matrix>(a).singularValues();
            inverse_log = std::max(inverse_log, -std::log(s(s.size() - 1)));
        }
        g.log_norm_bound_ = std::max(std::log(forward), declared_bound.value_or(inverse_log * 1.05 + 1e-9));
        return g;
    }

    // Lambda^k of `parent`; 1 <= k <= m.
    static CocycleGenerator exterior_power(const CocycleGenerator& parent, int k)
    {
        if (k < 1 || k > parent.dim_)
            throw DomainError("exterior power degree must lie in 1..m");
        const int dim = static_cast<int>(wedge_basis(parent.dim_, k).size());
        const double bound = k * parent.log_norm_bound_;
        CocycleGenerator g;
        if (const auto* c = std::get_if<generator::Constant>(&parent.kind_)) {
            Matrix w = wedge_matrix(c->matrix, k);
            Matrix inv = w.inverse();
            g.kind_ = generator::Constant{std::move(w), std::move(inv)};
        } else if (const auto* t = std::get_if<generator::SymbolTable>(&parent.kind_)) {
            generator::SymbolTable table;
            for (const auto& m : t->matrices) {
                table.matrices.push_back(wedge_matrix(m, k));
                table.inverses.push_back(table.matrices.back().inverse());
            }
            g.kind_ = std::move(table);
        } else {
            g.kind_ = generator::ExteriorPowerOf{std::make_shared<const CocycleGenerator>(parent), k};
        }
        g.dim_ = dim;
        g.torus_dim_ = parent.torus_dim_;
        g.log_norm_bound_ = bound;
        return g;
    }

    [[nodiscard]] const Kind& kind() const noexcept { return kind_; }
    [[nodiscard]] int dimension() const noexcept { return dim_; }
    [[nodiscard]] double log_norm_bound() const noexcept { return log_norm_bound_; }
    [[nodiscard]] bool is_constant() const noexcept { return std::holds_alternative<generator::Constant>(kind_); }
    [[nodiscard]] bool needs_torus() const noexcept
    {
        return std::holds_alternative<generator::SmoothTorus>(kind_) ||
               std::holds_alternative<generator::ExteriorPowerOf>(kind_);
    }
    [[nodiscard]] bool needs_shift() const noexcept { return std::holds_alternative<generator::SymbolTable>(kind_); }
    [[nodiscard]] std::size_t torus_dimension() const noexcept { return torus_dim_; }

    // A(x) into `out`.
    void evaluate(const Point& x, Matrix& out) const
    {
        std::visit(
            [&](const auto& k) {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, generator::Constant>) {
                    out = k.matrix;
                } else if constexpr (std::is_same_v<K, generator::SymbolTable>) {
                    const auto* s = std::get_if<SymbolicPoint>(&x);
                    if (!s)
                        throw TypeError("symbol_table generator needs a symbolic point");
                    out = k.matrices.at(static_cast<std::size_t>(s->coordinate(0)));
                } else {
                    const auto* t = std::get_if<TorusPoint>(&x);
                    if (!t)
                        throw TypeError("smooth_torus generator needs a torus point");
                    evaluate_torus(*t, out);
                }
            },
            kind_);
    }

    [[nodiscard]] Matrix at(const Point& x) const
    {
        Matrix out;
        evaluate(x, out);
        return out;
    }

    void evaluate_torus(const TorusPoint& x, Matrix& out) const
    {
        if (const auto* c = std::get_if<generator::Constant>(&kind_)) {
            out = c->matrix;
        } else if (const auto* p = std::get_if<generator::ExteriorPowerOf>(&kind_)) {
            Matrix parent;
            p->parent->evaluate_torus(x, parent);
            out = wedge_matrix(parent, p->k);
        } else if (std::holds_alternative<generator::SmoothTorus>(kind_)) {
            evaluate_smooth(x, out);
        } else {
            throw TypeError("symbol_table generator needs a symbolic point");
        }
    }

  private:
    CocycleGenerator() = default;

    static void check_matrix(const Matrix& m)
    {
        if (m.rows() != m.cols() || m.rows() < 1)
            throw ConfigError("generator matrices must be square and nonempty");
        if (!m.allFinite())
            throw ConfigError("generator matrix has non-finite entries");
        if (!(condition_number(m) <= kMaxConditionNumber))
            throw ConfigError("generator matrix is singular or has condition number > 1e12");
    }

    void evaluate_smooth(const TorusPoint& x, Matrix& out) const
    {
        const auto& s = std::get<generator::SmoothTorus>(kind_);
        if (x.dim() != torus_dim_ && !s.terms.empty())
            throw TypeError("smooth_torus generator dimension does not match the point");
        out = s.base;
        for (const auto& t : s.terms) {
            std::uint64_t phase = 0;
            for (std::size_t i = 0; i < t.frequency.size(); ++i)
                phase += static_cast<std::uint64_t>(t.frequency[i]) * x.raw()[i];
            const double angle = 2.0 * std::numbers::pi * detail::signed_fraction(phase);
            out += (t.wave == TrigTerm::Wave::cos ? std::cos(angle) : std::sin(angle)) * t.coefficient;
        }
    }

    Kind kind_;
    int dim_ = 0;
    std::size_t torus_dim_ = 0;
    double log_norm_bound_ = 0.0;
};

//---------------------------------------------------------------------------//
// Cocycles over a base system
//---------------------------------------------------------------------------//

/*!
 * The cocycle C(x, N) generated by x -> A(x) over `base`:
 * C(x, N) = A(T^{N-1} x) ... A(x) for N > 0, C(x, 0) = I and
 * C(x, -N) = A(T^{-N} x)^{-1} ... A(T^{-1} x)^{-1}.
 */
class MatrixCocycle {
  public:
    MatrixCocycle(PhaseSpaceSystem base, CocycleGenerator gen, int renorm_period = kDefaultRenormPeriod)
        : base_(std::move(base)), gen_(std::move(gen)), renorm_period_(renorm_period)
    {
        if (renorm_period_ < 1)
            throw ConfigError("renorm_period must be positive");
        if (renorm_period_ * gen_.log_norm_bound() > 300.0 * std::numbers::ln2)
            throw ConfigError("renorm_period * log_norm_bound exceeds 300 ln 2; shorten the period");
        if (gen_.needs_shift() && !base_.is_shift())
            throw ConfigError("symbol_table generator needs a shift base");
        if (gen_.needs_torus() && (!base_.is_torus() || gen_.torus_dimension() != base_.dimension()))
            throw ConfigError("smooth_torus generator needs a torus base of matching dimension");
        if (const auto* t = std::get_if<generator::SymbolTable>(&gen_.kind())) {
            if (static_cast<int>(t->matrices.size()) != base_.symbol_law()->alphabet_size())
                throw ConfigError("symbol_table needs one matrix per symbol");
        }
    }

    [[nodiscard]] const PhaseSpaceSystem& base() const noexcept { return base_; }
    [[nodiscard]] const CocycleGenerator& generator() const noexcept { return gen_; }
    [[nodiscard]] int dimension() const noexcept { return gen_.dimension(); }
    [[nodiscard]] int renorm_period() const noexcept { return renorm_period_; }

    [[nodiscard]] MatrixCocycle with_renorm_period(int period) const { return {base_, gen_, period}; }

    /*!
     * Visit the one-step factors of C(x, N) in application order:
     * A(T^n x) for n = 0..N-1 when N > 0, A(T^{-n} x)^{-1} for n = 1..|N|
     * when N < 0. Returns T^N x.
     */
    template <typename Visitor>
    Point walk(const Point& x, std::int64_t n_steps, Visitor&& visit) const
    {
        const int direction = n_steps >= 0 ? 1 : -1;
        const std::int64_t count = n_steps >= 0 ? n_steps : -n_steps;
        if (const auto* s = std::get_if<SymbolicPoint>(&x)) {
            if (!base_.is_shift())
                throw TypeError("symbolic point passed to a torus cocycle");
            if (const auto* table = std::get_if<generator::SymbolTable>(&gen_.kind())) {
                SymbolCursor cursor(*s, direction > 0 ? 0 : -1, direction);
                const auto& mats = direction > 0 ? table->matrices : table->inverses;
                for (std::int64_t n = 0; n < count; ++n)
                    visit(mats[static_cast<std::size_t>(cursor.next())]);
            } else {
                visit_constant(count, direction, visit);
            }
            return s->shifted(n_steps);
        }
        const auto& t = std::get<TorusPoint>(x);
        base_.check_dim(t);
        if (gen_.is_constant()) {
            visit_constant(count, direction, visit);
            return base_.advance(t, n_steps);
        }
        TorusPoint y = t;
        Matrix a;
        for (std::int64_t n = 0; n < count; ++n) {
            if (direction > 0) {
                gen_.evaluate_torus(y, a);
                visit(static_cast<const Matrix&>(a));
                base_.step(y);
            } else {
                base_.step_back(y);
                gen_.evaluate_torus(y, a);
                const Matrix inv = a.inverse();
                visit(inv);
            }
        }
        return y;
    }

  private:
    template <typename Visitor>
    void visit_constant(std::int64_t count, int direction, Visitor& visit) const
    {
        const auto& c = std::get<generator::Constant>(gen_.kind());
        const Matrix& m = direction > 0 ? c.matrix : c.inverse;
        for (std::int64_t n = 0; n < count; ++n)
            visit(m);
    }

    PhaseSpaceSystem base_;
    CocycleGenerator gen_;
    int renorm_period_;
};

// C(x, N) as a raw matrix, |N| <= 10^6.
inline Matrix evaluate(const MatrixCocycle& coc, const Point& x, std::int64_t n)
{
    if (n > kMaxRawProduct || n < -kMaxRawProduct)
        throw DomainError("raw cocycle products are limited to |N| <= 10^6; use sigma functionals");
    const auto m = coc.dimension();
    Matrix product = Matrix::Identity(m, m);
    Matrix tmp(m, m);
    std::int64_t step = 0;
    coc.walk(x, n, [&](const Matrix& a) {
        tmp.noalias() = a * product;
        product.swap(tmp);
        if (++step % 16 == 0 && product.cwiseAbs().maxCoeff() > 1e300)
            throw OverflowError("cocycle product overflows; use the sigma functionals");
    });
    if (!product.allFinite() || product.cwiseAbs().maxCoeff() > 1e300)
        throw OverflowError("cocycle product overflows; use the sigma functionals");
    return product;
}

namespace detail {

// Renormalization divides by exact powers of two and keeps the binary
// exponent as an integer, so sigma = (E + log2 ||u|| - log2 ||u_0||) ln 2
// is exact whenever the true expansion is a power of two.
inline int binary_exponent(double biggest)
{
    if (!(biggest > 0.0) || !std::isfinite(biggest))
        throw OverflowError("cocycle product left the floating range; shorten renorm_period");
    return std::ilogb(biggest);
}

// Track u <- A u with periodic renormalization.
class VectorTracker {
  public:
    VectorTracker(const Vector& v, int period) : u_(v), tmp_(v.size()), period_(period)
    {
        const double biggest = v.cwiseAbs().maxCoeff();
        if (!(biggest > 0.0) || !std::isfinite(biggest))
            throw DomainError("sigma_vec needs a nonzero finite vector");
        u_ *= std::ldexp(1.0, -std::ilogb(biggest));
        log2_initial_ = std::log2(u_.norm());
    }

    void push(const Matrix& a)
    {
        tmp_.noalias() = a * u_;
        u_.swap(tmp_);
        if (++steps_ % period_ == 0)
            renormalize();
    }

    void renormalize()
    {
        const int e = binary_exponent(u_.cwiseAbs().maxCoeff());
        u_ *= std::ldexp(1.0, -e);
        exponent_ += e;
    }

    [[nodiscard]] double sigma() const
    {
        return (static_cast<double>(exponent_) + std::log2(u_.norm()) - log2_initial_) * std::numbers::ln2;
    }
    [[nodiscard]] Vector direction() const { return u_.normalized(); }

  private:
    Vector u_, tmp_;
    int period_;
    std::int64_t steps_ = 0;
    std::int64_t exponent_ = 0;
    double log2_initial_ = 0.0;
};

// Track M <- A M with periodic renormalization; sigma = log of the top singular value.
class ProductTracker {
  public:
    ProductTracker(int m, int period) : product_(Matrix::Identity(m, m)), tmp_(m, m), period_(period) {}

    void push(const Matrix& a)
    {
        tmp_.noalias() = a * product_;
        product_.swap(tmp_);
        if (++steps_ % period_ == 0) {
            const int e = binary_exponent(product_.cwiseAbs().maxCoeff());
            product_ *= std::ldexp(1.0, -e);
            exponent_ += e;
        }
    }

    [[nodiscard]] double sigma() const
    {
        return (static_cast<double>(exponent_) + std::log2(operator_norm(product_))) * std::numbers::ln2;
    }

  private:
    Matrix product_, tmp_;
    int period_;
    std::int64_t steps_ = 0;
    std::int64_t exponent_ = 0;
};

}  // namespace detail

// sigma(x, v, N) = log ||C(x, N) v|| / ||v||
inline double sigma_vec(const MatrixCocycle& coc, const Point& x, const Vector& v, std::int64_t n)
{
    if (v.size() != coc.dimension())
        throw DomainError("vector dimension does not match the cocycle");
    detail::VectorTracker tracker(v, coc.renorm_period());
    coc.walk(x, n, [&](const Matrix& a) { tracker.push(a); });
    return tracker.sigma();
}

// sigma(x, N) = log ||C(x, N)|| (operator norm)
inline double sigma_norm(const MatrixCocycle& coc, const Point& x, std::int64_t n)
{
    detail::ProductTracker tracker(coc.dimension(), coc.renorm_period());
    coc.walk(x, n, [&](const Matrix& a) { tracker.push(a); });
    return tracker.sigma();
}

// Cocycle generated by Lambda^k A over the same base.
inline MatrixCocycle exterior_power(const MatrixCocycle& coc, int k)
{
    auto gen = CocycleGenerator::exterior_power(coc.generator(), k);
    int period = coc.renorm_period();
    if (gen.log_norm_bound() > 0)
        period = std::max(1, std::min(period, static_cast<int>(300.0 * std::numbers::ln2 / gen.log_norm_bound())));
    return {coc.base(), std::move(gen), period};
}

//---------------------------------------------------------------------------//
// Projective sampling and Lyapunov spectra
//---------------------------------------------------------------------------//

// nu on PR^m: normalized isotropic Gaussian vectors.
class ProjectiveSampler {
  public:
    explicit ProjectiveSampler(int dimension) : dim_(dimension)
    {
        if (dim_ < 1)
            throw ConfigError("projective dimension must be positive");
    }

    Vector sample(Stream& stream) const
    {
        Vector v(dim_);
        do {
            for (int i = 0; i < dim_; ++i)
                v(i) = stream.normal();
        } while (v.norm() == 0.0);
        return v.normalized();
    }

    [[nodiscard]] int dimension() const noexcept { return dim_; }

  private:
    int dim_;
};

// Random orthonormal frame (QR of a Gaussian matrix).
inline Matrix random_frame(int m, Stream& stream)
{
    Matrix g(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            g(i, j) = stream.normal();
    Eigen::HouseholderQR<Matrix> qr(g);
    return qr.householderQ() * Matrix::Identity(m, m);
}

/*!
 * Benettin-style accumulator: Q <- A Q, re-orthonormalized by QR, with the
 * log diagonal of R summed. Shared by the cocycle and Zorich spectra.
 */
class QrAccumulator {
  public:
    explicit QrAccumulator(Matrix frame) : q_(std::move(frame)), tmp_(q_.rows(), q_.cols()), log_r_(Vector::Zero(q_.cols())) {}

    void push(const Matrix& a)
    {
        tmp_.noalias() = a * q_;
        q_.swap(tmp_);
    }

    void orthonormalize(bool accumulate = true)
    {
        Eigen::HouseholderQR<Matrix> qr(q_);
        const auto& packed = qr.matrixQR();
        if (accumulate) {
            for (Eigen::Index i = 0; i < log_r_.size(); ++i)
                log_r_(i) += std::log(std::abs(packed(i, i)));
        }
        q_ = qr.householderQ() * Matrix::Identity(q_.rows(), q_.cols());
    }

    [[nodiscard]] const Vector& log_r() const noexcept { return log_r_; }
    void reset_sums() { log_r_.setZero(); }

  private:
    Matrix q_, tmp_;
    Vector log_r_;
};

struct LyapunovEstimate {
    std::vector<double> exponents;         // nonincreasing
    std::vector<double> standard_errors;   // cross-orbit standard errors
    std::vector<std::vector<double>> per_orbit;
    std::int64_t n_used = 0;
    std::vector<std::uint64_t> seeds_used; // per-orbit stream keys
    bool converged = true;
    std::string time_normalization = "base-map steps";

    [[nodiscard]] double exponent_sum() const
    {
        return std::accumulate(exponents.begin(), exponents.end(), 0.0);
    }
};

// Aggregate per-orbit spectra (each sorted nonincreasing) into mean and SE.
// An orbit more than 10 cross-orbit standard deviations away from the mean
// in any exponent marks the estimate as not converged.
inline LyapunovEstimate aggregate_spectra(std::vector<std::vector<double>> per_orbit)
{
    LyapunovEstimate est;
    if (per_orbit.empty())
        return est;
    const std::size_t m = per_orbit.front().size();
    for (auto& orbit : per_orbit)
        std::sort(orbit.begin(), orbit.end(), std::greater<>());
    est.exponents.assign(m, 0.0);
    est.standard_errors.assign(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        RunningMoments moments;
        for (const auto& orbit : per_orbit)
            moments.add(orbit[i]);
        est.exponents[i] = moments.mean();
        est.standard_errors[i] = moments.std_error();
        const double sd = std::sqrt(moments.variance());
        for (const auto& orbit : per_orbit) {
            const double dev = std::abs(orbit[i] - moments.mean());
            if (dev > 10.0 * sd && dev > 1e-12)
                est.converged = false;
        }
    }
    // Means of sorted vectors stay sorted; enforce against rounding ties.
    std::sort(est.exponents.begin(), est.exponents.end(), std::greater<>());
    est.per_orbit = std::move(per_orbit);
    return est;
}

struct SpectrumOptions {
    std::int64_t burn_in = 64;
    unsigned workers = 1;
};

inline LyapunovEstimate lyapunov_spectrum(const MatrixCocycle& coc, std::int64_t n_steps, std::size_t n_orbits,
                                          const Stream& stream, SpectrumOptions options = {})
{
    if (n_steps < 1000)
        throw DomainError("lyapunov_spectrum needs N >= 1000");
    if (n_orbits < 1)
        throw DomainError("lyapunov_spectrum needs at least one orbit");
    const int m = coc.dimension();
    const int period = coc.renorm_period();
    auto per_orbit = parallel_map(n_orbits, options.workers, [&](std::size_t orbit) {
        Stream s = stream.split(orbit);
        Point x = sample_measure(coc.base(), s);
        QrAccumulator acc(random_frame(m, s));
        std::int64_t step = 0;
        auto push = [&](const Matrix& a) {
            acc.push(a);
            if (++step % period == 0)
                acc.orthonormalize();
        };
        if (options.burn_in > 0) {
            x = coc.walk(x, options.burn_in, push);
            acc.orthonormalize();
            acc.reset_sums();
            step = 0;
        }
        coc.walk(x, n_steps, push);
        acc.orthonormalize();
        std::vector<double> exps(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i)
            exps[static_cast<std::size_t>(i)] = acc.log_r()(i) / static_cast<double>(n_steps);
        return exps;
    });
    LyapunovEstimate est = aggregate_spectra(std::move(per_orbit));
    est.n_used = n_steps;
    for (std::size_t orbit = 0; orbit < n_orbits; ++orbit)
        est.seeds_used.push_back(stream.split(orbit).key());
    return est;
}

//---------------------------------------------------------------------------//
// Hypothesis diagnostics
//---------------------------------------------------------------------------//

struct SplittingProfile {
    std::vector<double> values;       // index N-1 holds the value at N
    std::vector<double> running_max;

    // Relative growth of the running maximum between N = n_from and the end.
    [[nodiscard]] double final_growth(std::size_t n_from) const
    {
        if (running_max.empty() || n_from < 1 || n_from > running_max.size())
            return 0.0;
        const double before = running_max[n_from - 1];
        const double after = running_max.back();
        if (before == 0.0)
            return after == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        return after / before - 1.0;
    }
};

inline SplittingProfile make_profile(std::vector<double> values)
{
    SplittingProfile p;
    p.running_max.resize(values.size());
    double best = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        best = std::max(best, values[i]);
        p.running_max[i] = best;
    }
    p.values = std::move(values);
    return p;
}

// |sigma(x, v, N) - sigma(x, w, N)|, N = 1..N_max
inline SplittingProfile dominated_splitting_profile(const MatrixCocycle& coc, const Point& x, const Vector& v,
                                                    const Vector& w, std::size_t n_max)
{
    detail::VectorTracker tv(v, coc.renorm_period()), tw(w, coc.renorm_period());
    std::vector<double> values;
    values.reserve(n_max);
    coc.walk(x, static_cast<std::int64_t>(n_max), [&](const Matrix& a) {
        tv.push(a);
        tw.push(a);
        values.push_back(std::abs(tv.sigma() - tw.sigma()));
    });
    return make_profile(std::move(values));
}

// |sigma(x, v, N) - sigma(x, N)|, N = 1..N_max
inline SplittingProfile strong_splitting_profile(const MatrixCocycle& coc, const Point& x, const Vector& v,
                                                 std::size_t n_max)
{
    detail::VectorTracker tv(v, coc.renorm_period());
    detail::ProductTracker tm(coc.dimension(), coc.renorm_period());
    std::vector<double> values;
    values.reserve(n_max);
    coc.walk(x, static_cast<std::int64_t>(n_max), [&](const Matrix& a) {
        tv.push(a);
        tm.push(a);
        values.push_back(std::abs(tv.sigma() - tm.sigma()));
    });
    return make_profile(std::move(values));
}

/*!
 * A measurable section x -> s(x) in R^m: a constant vector, a
 * trigonometric family over the torus, or one vector per symbol x_0.
 */
class Section {
  public:
    struct Term {
        TrigTerm::Wave wave = TrigTerm::Wave::cos;
        std::vector<std::int64_t> frequency;
        Vector coefficient;
    };

    static Section constant(Vector v)
    {
        Section s;
        s.base_ = std::move(v);
        return s;
    }
    static Section torus_trig(Vector base, std::vector<Term> terms)
    {
        Section s;
        s.base_ = std::move(base);
        for (const auto& t : terms)
            if (t.coefficient.size() != s.base_.size())
                throw ConfigError("section term has the wrong dimension");
        s.terms_ = std::move(terms);
        return s;
    }
    static Section symbol_table(std::vector<Vector> table)
    {
        if (table.empty())
            throw ConfigError("section symbol table is empty");
        Section s;
        s.base_ = table.front();
        s.table_ = std::move(table);
        return s;
    }

    [[nodiscard]] int dimension() const noexcept { return static_cast<int>(base_.size()); }

    [[nodiscard]] Vector at(const Point& x) const
    {
        Vector out;
        if (!table_.empty()) {
            const auto* s = std::get_if<SymbolicPoint>(&x);
            if (!s)
                throw TypeError("symbol-table section needs a symbolic point");
            out = table_.at(static_cast<std::size_t>(s->coordinate(0)));
        } else {
            out = base_;
            if (!terms_.empty()) {
                const auto* t = std::get_if<TorusPoint>(&x);
                if (!t)
                    throw TypeError("trigonometric section needs a torus point");
                for (const auto& term : terms_) {
                    if (term.frequency.size() != t->dim())
                        throw TypeError("section frequency dimension does not match the point");
                    std::uint64_t phase = 0;
                    for (std::size_t i = 0; i < term.frequency.size(); ++i)
                        phase += static_cast<std::uint64_t>(term.frequency[i]) * t->raw()[i];
                    const double angle = 2.0 * std::numbers::pi * detail::signed_fraction(phase);
                    out += (term.wave == TrigTerm::Wave::cos ? std::cos(angle) : std::sin(angle)) * term.coefficient;
                }
            }
        }
        if (!(out.norm() > 0.0))
            throw DomainError("section vanishes at the base point");
        return out;
    }

  private:
    Vector base_;
    std::vector<Term> terms_;
    std::vector<Vector> table_;
};

// |sigma(x, s(x), N) - sigma(x, w, N)|, N = 1..N_max
inline SplittingProfile section_genericity_profile(const MatrixCocycle& coc, const Section& section, const Point& x,
                                                   const Vector& w, std::size_t n_max)
{
    if (section.dimension() != coc.dimension())
        throw DomainError("section dimension does not match the cocycle");
    return dominated_splitting_profile(coc, x, section.at(x), w, n_max);
}

// D over U: identity transport or a custom generator.
class CompanionCocycle {
  public:
    static CompanionCocycle identity_transport() { return CompanionCocycle{}; }
    static CompanionCocycle custom(CocycleGenerator gen)
    {
        CompanionCocycle c;
        c.gen_ = std::make_shared<const CocycleGenerator>(std::move(gen));
        return c;
    }

    [[nodiscard]] bool is_identity() const noexcept { return !gen_; }

    // D(x, 1) v
    [[nodiscard]] Vector transport(const Point& x, const Vector& v) const
    {
        if (!gen_)
            return v;
        return gen_->at(x) * v;
    }

  private:
    std::shared_ptr<const CocycleGenerator> gen_;
};

// |sigma(x, v, N) - sigma(Ux, D(x,1) v, N)|, N = 1..N_max
inline SplittingProfile cocycle_adaptedness_profile(const MatrixCocycle& coc, const CompanionCocycle& comp,
                                                    const Point& x, const Vector& v, std::size_t n_max)
{
    const auto& sys = coc.base();
    sys.require_companion();
    const auto* t = std::get_if<TorusPoint>(&x);
    if (!t)
        throw TypeError("cocycle adaptedness needs a torus point");
    sys.check_dim(*t);
    const Vector v_moved = comp.transport(x, v);
    detail::VectorTracker tx(v, coc.renorm_period()), tu(v_moved, coc.renorm_period());
    const bool closed_form = std::holds_alternative<companion::StableTranslation>(*sys.companion());
    TorusPoint y = *t;
    TorusPoint z = std::get<TorusPoint>(apply_companion(sys, x));
    Matrix ay, az;
    std::vector<double> values;
    values.reserve(n_max);
    for (std::size_t n = 0; n < n_max; ++n) {
        if (closed_form)
            z = companion_orbit_point(sys, y, static_cast<std::int64_t>(n));
        coc.generator().evaluate_torus(y, ay);
        coc.generator().evaluate_torus(z, az);
        tx.push(ay);
        tu.push(az);
        values.push_back(std::abs(tx.sigma() - tu.sigma()));
        sys.step(y);
        if (!closed_form)
            sys.step(z);
    }
    return make_profile(std::move(values));
}

struct BoundednessReport {
    double max_forward = 0.0;   // max of max(0, sigma(x, 1))
    double mean_forward = 0.0;
    double max_backward = 0.0;  // max of max(0, sigma(x, -1))
    double mean_backward = 0.0;
    double bound = 0.0;
    bool pass = true;
    std::string witness;        // base point of the worst violation, if any
};

inline std::string describe_point(const Point& x)
{
    std::ostringstream os;
    os.precision(17);
    if (const auto* t = std::get_if<TorusPoint>(&x)) {
        os << "torus(";
        for (std::size_t i = 0; i < t->dim(); ++i)
            os << (i ? ", " : "") << t->coord(i);
        os << ")";
    } else {
        const auto& s = std::get<SymbolicPoint>(x);
        os << "shift(seed=" << s.seed() << ", offset=" << s.offset() << ")";
    }
    return os.str();
}

inline BoundednessReport boundedness_check(const MatrixCocycle& coc, std::size_t n_samples, const Stream& stream,
                                           unsigned workers = 1)
{
    struct Row {
        double forward = 0, backward = 0;
    };
    auto rows = parallel_map(n_samples, workers, [&](std::size_t i) {
        Stream s = stream.split(i);
        const Point x = sample_measure(coc.base(), s);
        return Row{std::max(0.0, sigma_norm(coc, x, 1)), std::max(0.0, sigma_norm(coc, x, -1))};
    });
    BoundednessReport report;
    report.bound = coc.generator().log_norm_bound();
    CompensatedSum fwd, bwd;
    std::size_t worst = n_samples;
    double worst_excess = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        report.max_forward = std::max(report.max_forward, rows[i].forward);
        report.max_backward = std::max(report.max_backward, rows[i].backward);
        fwd += rows[i].forward;
        bwd += rows[i].backward;
        const double excess = std::max(rows[i].forward, rows[i].backward) - report.bound;
        if (excess > 1e-12 && excess > worst_excess) {
            worst_excess = excess;
            worst = i;
        }
    }
    if (!rows.empty()) {
        report.mean_forward = fwd.value() / static_cast<double>(rows.size());
        report.mean_backward = bwd.value() / static_cast<double>(rows.size());
    }
    if (worst < n_samples) {
        report.pass = false;
        Stream s = stream.split(worst);
        report.witness = describe_point(sample_measure(coc.base(), s));
    }
    return report;
}

}  // namespace mixlt
