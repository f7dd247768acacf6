#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "mixlt/birkhoff.hpp"
#include "mixlt/cocycle.hpp"
#include "mixlt/config.hpp"
#include "mixlt/diagnostics.hpp"
#include "mixlt/dynamics.hpp"
#include "mixlt/laws.hpp"
#include "mixlt/stats.hpp"
#include "mixlt/zorich.hpp"

namespace mixlt {

inline constexpr const char* kVersion = "mixlt 1.0.0";

using Json = nlohmann::json;

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int failed = 1;
inline constexpr int config = 2;
inline constexpr int numerical = 3;
}  // namespace exit_code

//---------------------------------------------------------------------------//
// Builders from config values
//---------------------------------------------------------------------------//

namespace build {

inline Matrix matrix(const std::string& key, const std::string& text)
{
    std::vector<std::vector<double>> rows;
    for (const auto& row : Config::split(text, ';')) {
        std::vector<double> values;
        for (const auto& token : Config::tokens(row))
            values.push_back(Config::to_double(key, token));
        if (values.empty())
            throw TypeError("key '" + key + "' has an empty matrix row");
        rows.push_back(std::move(values));
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto m = static_cast<Eigen::Index>(rows.front().size());
    Matrix out(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != m)
            throw TypeError("key '" + key + "' has rows of unequal length");
        for (Eigen::Index j = 0; j < m; ++j)
            out(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    return out;
}

inline IntMatrix int_matrix(const std::string& key, const std::string& text)
{
    const Matrix m = matrix(key, text);
    IntMatrix out(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (m(i, j) != std::round(m(i, j)) || std::abs(m(i, j)) > 1e15)
                throw TypeError("key '" + key + "' expects an integer matrix");
            out(i, j) = static_cast<std::int64_t>(m(i, j));
        }
    return out;
}

inline std::vector<Matrix> matrices(const std::string& key, const std::string& text)
{
    std::vector<Matrix> out;
    for (const auto& part : Config::split(text, '|'))
        out.push_back(matrix(key, part));
    return out;
}

inline TrigTerm::Wave wave(const std::string& key, const std::string& name)
{
    if (name == "cos")
        return TrigTerm::Wave::cos;
    if (name == "sin")
        return TrigTerm::Wave::sin;
    throw TypeError("key '" + key + "' expects cos or sin, got '" + name + "'");
}

// "cos k1 k2 / M | sin k1 k2 / M" with M a matrix (or vector) literal.
template <typename Term, typename Parse>
std::vector<Term> terms(const std::string& key, const std::string& text, Parse&& parse_coefficient)
{
    std::vector<Term> out;
    for (const auto& part : Config::split(text, '|')) {
        const auto halves = Config::split(part, '/');
        if (halves.size() != 2)
            throw TypeError("key '" + key + "' expects terms of the form 'cos k1 k2 / coefficient'");
        const auto head = Config::tokens(halves[0]);
        if (head.size() < 2)
            throw TypeError("key '" + key + "' term needs a wave and a frequency");
        Term term;
        term.wave = wave(key, head[0]);
        for (std::size_t i = 1; i < head.size(); ++i)
            term.frequency.push_back(Config::to_int(key, head[i]));
        term.coefficient = parse_coefficient(halves[1]);
        out.push_back(std::move(term));
    }
    return out;
}

inline Vector vector(const std::string& key, const std::string& text)
{
    std::vector<double> values;
    for (const auto& token : Config::tokens(text))
        values.push_back(Config::to_double(key, token));
    if (values.empty())
        throw TypeError("key '" + key + "' expects a nonempty vector");
    return Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

inline PhaseSpaceSystem system(const Config& cfg, const std::string& section, bool with_companion)
{
    const std::string kind = cfg.get_string(section + ".kind");
    std::optional<CompanionMap> companion;
    if (with_companion && cfg.has_section("companion")) {
        const std::string ck = cfg.get_string("companion.kind");
        if (ck == "stable_translation")
            companion = companion::StableTranslation{cfg.get_double("companion.amplitude")};
        else if (ck == "identity")
            companion = companion::Identity{};
        else if (ck == "translation")
            companion = companion::Translation{cfg.get_doubles("companion.vector")};
        else
            throw ConfigError("companion.kind '" + ck + "' is not one of stable_translation, identity, translation");
    }
    if (kind == "torus_automorphism")
        return PhaseSpaceSystem::torus_automorphism(int_matrix(section + ".matrix", cfg.get_string(section + ".matrix")),
                                                    companion);
    if (kind == "torus_translation")
        return PhaseSpaceSystem::torus_translation(cfg.get_doubles(section + ".vector"), companion);
    if (kind == "two_sided_shift") {
        if (companion)
            throw ConfigError("companion maps are not provided for shift systems");
        return PhaseSpaceSystem::two_sided_shift(cfg.get_doubles(section + ".weights"));
    }
    throw ConfigError(section + ".kind '" + kind +
                      "' is not one of torus_automorphism, torus_translation, two_sided_shift");
}

inline Observable observable(const Config& cfg, const PhaseSpaceSystem& sys)
{
    const std::string kind = cfg.get_string("observable.kind");
    if (kind == "coordinate_cosine")
        return Observable::coordinate_cosine(sys, cfg.get_ints("observable.frequency"));
    if (kind == "coordinate_symbol")
        return Observable::coordinate_symbol(sys, cfg.get_int("observable.index", 0));
    if (kind == "constant")
        return Observable::constant(cfg.get_double("observable.value"));
    throw ConfigError("observable.kind '" + kind + "' is not one of coordinate_cosine, coordinate_symbol, constant");
}

inline CocycleGenerator generator(const Config& cfg, const PhaseSpaceSystem& base)
{
    const std::string kind = cfg.get_string("cocycle.kind");
    std::optional<CocycleGenerator> gen;
    if (kind == "constant") {
        gen = CocycleGenerator::constant(matrix("cocycle.matrix", cfg.get_string("cocycle.matrix")));
    } else if (kind == "derivative") {
        const auto* automorphism = std::get_if<TorusAutomorphism>(&base.kind());
        if (!automorphism)
            throw ConfigError("cocycle.kind 'derivative' needs a torus_automorphism base");
        gen = CocycleGenerator::constant(automorphism->matrix.cast<double>());
    } else if (kind == "symbol_table") {
        gen = CocycleGenerator::symbol_table(matrices("cocycle.matrices", cfg.get_string("cocycle.matrices")));
    } else if (kind == "smooth_torus") {
        Matrix b = matrix("cocycle.base", cfg.get_string("cocycle.base"));
        auto ts = cfg.has("cocycle.terms")
                      ? terms<TrigTerm>("cocycle.terms", cfg.get_string("cocycle.terms"),
                                        [](const std::string& t) { return matrix("cocycle.terms", t); })
                      : std::vector<TrigTerm>{};
        std::optional<double> declared;
        if (cfg.has("cocycle.log_norm_bound"))
            declared = cfg.get_double("cocycle.log_norm_bound");
        gen = CocycleGenerator::smooth_torus(std::move(b), std::move(ts), declared);
    } else {
        throw ConfigError("cocycle.kind '" + kind + "' is not one of constant, derivative, symbol_table, smooth_torus");
    }
    const auto k = cfg.get_int("cocycle.exterior_power", 1);
    if (k != 1)
        gen = CocycleGenerator::exterior_power(*gen, static_cast<int>(k));
    return *gen;
}

// The cocycle runs over [cocycle_system] when present, otherwise over `sys`.
inline MatrixCocycle cocycle(const Config& cfg, const PhaseSpaceSystem& sys)
{
    PhaseSpaceSystem base = cfg.has_section("cocycle_system") ? system(cfg, "cocycle_system", false) : sys;
    CocycleGenerator gen = generator(cfg, base);
    const auto period = cfg.get_int("cocycle.renorm_period", kDefaultRenormPeriod);
    return {std::move(base), std::move(gen), static_cast<int>(period)};
}

inline Section section(const Config& cfg)
{
    const std::string kind = cfg.get_string("section.kind");
    if (kind == "constant")
        return Section::constant(vector("section.vector", cfg.get_string("section.vector")));
    if (kind == "symbol_table") {
        std::vector<Vector> table;
        for (const auto& part : Config::split(cfg.get_string("section.vectors"), '|'))
            table.push_back(vector("section.vectors", part));
        return Section::symbol_table(std::move(table));
    }
    if (kind == "torus_trig") {
        Vector b = vector("section.base", cfg.get_string("section.base"));
        auto ts = terms<Section::Term>("section.terms", cfg.get_string("section.terms"),
                                       [](const std::string& t) { return vector("section.terms", t); });
        return Section::torus_trig(std::move(b), std::move(ts));
    }
    throw ConfigError("section.kind '" + kind + "' is not one of constant, torus_trig, symbol_table");
}

/*!
 * Event literals:
 *   full_space
 *   box l1 u1, l2 u2          (one lower/upper pair per coordinate)
 *   cylinder first : s0 s1 ...
 *   cap radius : c1 c2 ...
 */
inline Event event(const std::string& key, const std::string& text, const PhaseSpaceSystem& sys)
{
    const std::string body = Config::trim(text);
    const auto space = body.find(' ');
    const std::string head = body.substr(0, space);
    const std::string rest = space == std::string::npos ? "" : body.substr(space + 1);
    if (head == "full_space")
        return Event::full_space();
    if (head == "box") {
        std::vector<double> lower, upper;
        for (const auto& pair : Config::split(rest, ',')) {
            const auto bounds = Config::tokens(pair);
            if (bounds.size() != 2)
                throw TypeError("key '" + key + "' box expects 'lower upper' pairs separated by commas");
            lower.push_back(Config::to_double(key, bounds[0]));
            upper.push_back(Config::to_double(key, bounds[1]));
        }
        return Event::torus_box(sys, std::move(lower), std::move(upper));
    }
    const auto parts = Config::split(rest, ':');
    if (parts.size() != 2)
        throw TypeError("key '" + key + "' expects '" + head + " <value> : <list>'");
    if (head == "cylinder") {
        std::vector<int> symbols;
        for (const auto& token : Config::tokens(parts[1]))
            symbols.push_back(static_cast<int>(Config::to_int(key, token)));
        return Event::shift_cylinder(sys, Config::to_int(key, parts[0]), std::move(symbols));
    }
    if (head == "cap")
        return Event::projective_cap(vector(key, parts[1]), Config::to_double(key, parts[0]));
    throw ConfigError("key '" + key + "' event kind '" + head + "' is not one of full_space, box, cylinder, cap");
}

inline Interval interval(const Config& cfg)
{
    return {cfg.get_double("interval.lower"), cfg.get_double("interval.upper")};
}

}  // namespace build

//---------------------------------------------------------------------------//
// Runs
//---------------------------------------------------------------------------//

struct RunOptions {
    std::optional<std::uint64_t> seed;
    unsigned workers = 1;
    bool dump_samples = false;
};

struct CsvDump {
    std::string suffix;   // appended to the experiment name
    std::string header;
    std::vector<double> values;
};

struct Outcome {
    Json report;
    int exit_code = exit_code::ok;
    std::vector<CsvDump> dumps;
};

namespace detail {

inline Json estimate_json(const Estimate& e)
{
    return Json{{"N", e.n},           {"estimate", e.estimate},   {"target", e.target},
                {"deviation", e.deviation}, {"std_error", e.std_error}, {"tolerance", e.tolerance},
                {"pass", e.pass}};
}

inline Json vec_json(const std::vector<double>& v) { return Json(v); }

inline Json point_json(const Point& x) { return describe_point(x); }

using AnySource = std::variant<BirkhoffSource, CocycleSource>;

class Experiment {
  public:
    Experiment(Config cfg, RunOptions options) : cfg_(std::move(cfg)), options_(options)
    {
        if (options_.seed)
            cfg_.set("experiment.seed", std::to_string(*options_.seed));
        seed_ = cfg_.get_u64("experiment.seed", 1);
        root_ = Stream(seed_);
    }

    Outcome run()
    {
        const std::string kind = cfg_.get_string("experiment.kind");
        name_ = cfg_.get_string("experiment.name", kind);
        Outcome out;
        if (kind == "plain_dlt")
            out = plain_dlt();
        else if (kind == "conditional_dlt" || kind == "mixing_dlt")
            out = event_dlt(kind == "mixing_dlt");
        else if (kind == "mixing_correlation")
            out = mixing_correlation();
        else if (kind == "char_fn")
            out = char_fn();
        else if (kind == "spectrum")
            out = spectrum();
        else if (kind == "zorich_spectrum")
            out = zorich();
        else if (kind == "hypothesis_check")
            return check(true);
        else
            throw ConfigError("experiment.kind '" + kind + "' is not a known experiment");
        finish(out, kind);
        return out;
    }

    // Hypothesis diagnostics for whatever the config describes.
    Outcome check(bool strict = false)
    {
        if (name_.empty())
            name_ = cfg_.get_string("experiment.name", "check");
        Outcome out = hypothesis_sections(strict);
        finish(out, "hypothesis_check");
        return out;
    }

    [[nodiscard]] const std::string& name() const noexcept { return name_; }

  private:
    void finish(Outcome& out, const std::string& kind)
    {
        out.report["experiment"] = name_;
        out.report["kind"] = kind;
        out.report["seed"] = seed_;
        out.report["version"] = kVersion;
        Json resolved = Json::object();
        for (const auto& [k, v] : cfg_.resolved())
            resolved[k] = v;
        out.report["config"] = std::move(resolved);
        if (out.exit_code == exit_code::ok && !out.report.value("pass", false))
            out.exit_code = exit_code::failed;
    }

    Stream stream(std::uint64_t purpose) const { return root_.split(purpose); }
    static constexpr std::uint64_t kEstimation = 1, kLyapunovPrior = 2, kGreenKubo = 3, kCheck = 4;

    std::vector<std::int64_t> n_list() const
    {
        auto ns = cfg_.get_ints("experiment.N");
        if (ns.empty())
            throw ConfigError("experiment.N must list at least one value");
        for (auto n : ns)
            if (n < 1)
                throw ConfigError("experiment.N values must be positive");
        return ns;
    }

    std::int64_t single_n() const
    {
        const auto ns = n_list();
        if (ns.size() != 1)
            throw ConfigError("experiment.N must be a single value for this experiment");
        return ns.front();
    }

    std::size_t samples() const
    {
        const auto n = cfg_.get_int("experiment.samples");
        if (n < 1)
            throw ConfigError("experiment.samples must be positive");
        return static_cast<std::size_t>(n);
    }

    std::optional<double> tolerance() const
    {
        if (cfg_.has("experiment.tolerance"))
            return cfg_.get_double("experiment.tolerance");
        return std::nullopt;
    }

    EstimateOptions estimate_options() const { return {options_.workers, tolerance()}; }

    // System, source and scheme for the DLT-type experiments.
    struct Setup {
        std::optional<PhaseSpaceSystem> sys;
        std::optional<Observable> f;
        std::optional<MatrixCocycle> coc;
        std::optional<AnySource> source;
        std::optional<NormalizingScheme> scheme;
        Json extras = Json::object();
        std::vector<std::string> warnings;
    };

    Setup setup(bool need_scheme = true) const
    {
        Setup s;
        s.sys = build::system(cfg_, "system", true);
        const std::string functional =
            cfg_.get_string("experiment.functional", cfg_.has_section("observable") ? "birkhoff" : "sigma_vec");
        if (functional == "birkhoff") {
            s.f = build::observable(cfg_, *s.sys);
            s.source = BirkhoffSource(*s.sys, *s.f);
        } else {
            s.coc = build::cocycle(cfg_, *s.sys);
            if (functional == "sigma_vec")
                s.source = CocycleSource::vector(*s.coc);
            else if (functional == "sigma_norm")
                s.source = CocycleSource::norm(*s.coc);
            else if (functional == "sigma_section")
                s.source = CocycleSource::section(*s.coc, build::section(cfg_));
            else
                throw ConfigError("experiment.functional '" + functional +
                                  "' is not one of birkhoff, sigma_vec, sigma_norm, sigma_section");
        }
        if (need_scheme)
            s.scheme = scheme(s);
        return s;
    }

    NormalizingScheme scheme(Setup& s) const
    {
        Averaging avg;
        const std::string averaging = cfg_.get_string("scheme.averaging", s.f ? "mean" : "zero");
        if (averaging == "mean") {
            if (!s.f)
                throw ConfigError("scheme.averaging 'mean' needs an observable");
            avg = {Averaging::Kind::linear, s.f->exact_mean(), {}};
        } else if (averaging == "zero") {
            avg = {Averaging::Kind::zero, 0.0, {}};
        } else if (averaging == "linear") {
            avg = {Averaging::Kind::linear, cfg_.get_double("scheme.rate"), {}};
        } else if (averaging == "table") {
            avg = {Averaging::Kind::table, 0.0, cfg_.get_doubles("scheme.averaging_table")};
        } else if (averaging == "lyapunov") {
            if (!s.coc)
                throw ConfigError("scheme.averaging 'lyapunov' needs a cocycle functional");
            avg = {Averaging::Kind::linear, prior_top_exponent(*s.coc, s.extras), {}};
        } else {
            throw ConfigError("scheme.averaging '" + averaging + "' is not one of mean, zero, linear, table, lyapunov");
        }

        Normalizing norm;
        const std::string normalizing = cfg_.get_string("scheme.normalizing", "sqrt");
        if (normalizing == "linear")
            norm = {Normalizing::Kind::linear, {}};
        else if (normalizing == "sqrt")
            norm = {Normalizing::Kind::sqrt, {}};
        else if (normalizing == "table")
            norm = {Normalizing::Kind::table, cfg_.get_doubles("scheme.normalizing_table")};
        else
            throw ConfigError("scheme.normalizing '" + normalizing + "' is not one of linear, sqrt, table");

        const std::string law = cfg_.get_string("scheme.law", "gaussian");
        if (law == "dirac_at_zero" || law == "dirac")
            return {avg, norm, ReferenceLaw::dirac_at_zero()};
        if (law != "gaussian")
            throw ConfigError("scheme.law '" + law + "' is not one of gaussian, dirac_at_zero");
        const std::string variance = cfg_.get_string("scheme.variance");
        double v = 0.0;
        if (variance == "green_kubo") {
            if (!s.f)
                throw ConfigError("scheme.variance 'green_kubo' needs an observable");
            const auto lag = static_cast<std::size_t>(cfg_.get_int("green_kubo.lag_max", 128));
            const auto n = static_cast<std::size_t>(cfg_.get_int("green_kubo.samples", 20000));
            const auto window = static_cast<std::size_t>(cfg_.get_int("green_kubo.window", 0));
            const GreenKuboResult gk =
                variance_green_kubo(*s.sys, *s.f, lag, n, stream(kGreenKubo), options_.workers, window);
            s.extras["green_kubo"] = Json{{"variance", gk.variance},   {"raw_variance", gk.raw_variance},
                                          {"var_f", gk.var_f},         {"tail", gk.tail},
                                          {"tail_ok", gk.tail_ok},     {"clamped", gk.clamped},
                                          {"lag_max", lag},            {"samples", n}};
            if (!gk.advisory.empty())
                s.warnings.push_back("green_kubo: " + gk.advisory);
            v = gk.variance;
        } else {
            v = Config::to_double("scheme.variance", variance);
        }
        return {avg, norm, ReferenceLaw::gaussian(v)};
    }

    double prior_top_exponent(const MatrixCocycle& coc, Json& extras) const
    {
        const auto steps = cfg_.get_int("lyapunov.steps", 10000);
        const auto orbits = static_cast<std::size_t>(cfg_.get_int("lyapunov.orbits", 32));
        const auto burn_in = cfg_.get_int("lyapunov.burn_in", 64);
        const LyapunovEstimate est =
            lyapunov_spectrum(coc, steps, orbits, stream(kLyapunovPrior), {burn_in, options_.workers});
        extras["lyapunov_prior"] = Json{{"exponents", est.exponents},
                                        {"standard_errors", est.standard_errors},
                                        {"steps", steps},
                                        {"orbits", orbits}};
        return est.exponents.front();
    }

    void attach(Outcome& out, const Setup& s) const
    {
        out.report["extras"].update(s.extras);
        if (!s.warnings.empty())
            out.report["warnings"] = s.warnings;
        if (s.scheme)
            out.report["extras"]["law"] =
                Json{{"kind", s.scheme->law().name()}, {"variance", s.scheme->law().variance()}};
    }

    std::string value_header(const Setup& s) const
    {
        return std::holds_alternative<BirkhoffSource>(*s.source) ? "sample_index,S_N" : "sample_index,sigma";
    }

    Outcome plain_dlt()
    {
        Setup s = setup();
        const auto ns = n_list();
        const auto n_samples = samples();
        std::optional<Interval> iv;
        if (cfg_.has_section("interval"))
            iv = build::interval(cfg_);
        const auto opts = estimate_options();
        cfg_.reject_unused("experiment kind plain_dlt");
        const PlainDltResult r = std::visit(
            [&](const auto& src) {
                return estimate_plain_dlt(src, *s.scheme, ns, n_samples, stream(kEstimation), iv, opts);
            },
            *s.source);
        Outcome out;
        const Estimate& last = r.per_n.back();
        out.report = {{"N", last.n},           {"n_samples", n_samples},       {"estimate", last.estimate},
                      {"target", last.target}, {"deviation", last.deviation}, {"std_error", last.std_error},
                      {"tolerance", last.tolerance}, {"pass", r.pass()}};
        Json per_n = Json::array();
        for (std::size_t i = 0; i < r.per_n.size(); ++i) {
            Json row = estimate_json(r.per_n[i]);
            row["ks"] = r.ks[i];
            per_n.push_back(std::move(row));
            if (options_.dump_samples)
                out.dumps.push_back({".samples.N" + std::to_string(r.per_n[i].n), value_header(s), r.per_n[i].samples});
        }
        out.report["extras"] = Json{{"statistic", iv ? "interval_mass" : "ks_distance"},
                                    {"ks", r.ks.back()},
                                    {"per_N", std::move(per_n)},
                                    {"trend", r.trend}};
        if (iv)
            out.report["extras"]["interval"] = Json{{"lower", iv->a}, {"upper", iv->b}};
        attach(out, s);
        return out;
    }

    Outcome event_dlt(bool mixing)
    {
        Setup s = setup();
        const auto n = single_n();
        const auto n_samples = samples();
        const Interval iv = build::interval(cfg_);
        const Event a = build::event("events.a", cfg_.get_string("events.a", "full_space"), s.source->index() == 0
                                                                                               ? *s.sys
                                                                                               : s.coc->base());
        std::optional<Event> b;
        if (mixing)
            b = build::event("events.b", cfg_.get_string("events.b", "full_space"),
                             s.source->index() == 0 ? *s.sys : s.coc->base());
        const auto opts = estimate_options();
        cfg_.reject_unused(std::string("experiment kind ") + (mixing ? "mixing_dlt" : "conditional_dlt"));
        const EventDltResult r = std::visit(
            [&](const auto& src) {
                return mixing ? estimate_mixing_dlt(src, *s.scheme, a, *b, iv, n, n_samples, stream(kEstimation), opts)
                              : estimate_conditional_dlt(src, *s.scheme, a, iv, n, n_samples, stream(kEstimation),
                                                         opts);
            },
            *s.source);
        Outcome out;
        out.report = estimate_json(r.estimate);
        out.report["n_samples"] = n_samples;
        out.report["extras"] = Json{{"mass_a", r.mass_a},
                                    {"mass_b", r.mass_b},
                                    {"law_mass", r.law_mass},
                                    {"interval", Json{{"lower", iv.a}, {"upper", iv.b}}},
                                    {"event_a", a.name()}};
        if (mixing) {
            out.report["extras"]["event_b"] = b->name();
            out.report["extras"]["hypotheses_verifiable"] = r.hypotheses_verifiable;
            if (!r.hypotheses_verifiable)
                s.warnings.push_back("base system has no companion map; mixing hypotheses are unverifiable");
        }
        if (options_.dump_samples)
            out.dumps.push_back({".samples.N" + std::to_string(n), value_header(s), r.estimate.samples});
        attach(out, s);
        return out;
    }

    Outcome mixing_correlation()
    {
        const PhaseSpaceSystem sys = build::system(cfg_, "system", true);
        const auto ns = n_list();
        const auto n_samples = samples();
        const Event a = build::event("events.a", cfg_.get_string("events.a"), sys);
        const Event b = build::event("events.b", cfg_.get_string("events.b"), sys);
        const auto opts = estimate_options();
        cfg_.reject_unused("experiment kind mixing_correlation");
        const auto rows = estimate_mixing_correlation(sys, a, b, ns, n_samples, stream(kEstimation), opts);
        Outcome out;
        bool pass = true;
        Json per_n = Json::array();
        const Estimate* worst = &rows.front();
        for (const auto& e : rows) {
            pass = pass && e.pass;
            per_n.push_back(estimate_json(e));
            if (e.deviation - e.tolerance > worst->deviation - worst->tolerance)
                worst = &e;
        }
        out.report = estimate_json(*worst);
        out.report["n_samples"] = n_samples;
        out.report["pass"] = pass;
        out.report["extras"] = Json{{"per_N", std::move(per_n)}, {"mass_a", a.exact_mass()}, {"mass_b", b.exact_mass()}};
        return out;
    }

    Outcome char_fn()
    {
        Setup s = setup();
        const auto n = single_n();
        const auto n_samples = samples();
        const double t = cfg_.get_double("charfn.t");
        const std::string spec = cfg_.get_string("charfn.weight", "full_space");
        const PhaseSpaceSystem& base = s.source->index() == 0 ? *s.sys : s.coc->base();
        std::optional<Weight> weight;
        const auto head = Config::tokens(spec);
        if (!head.empty() && head[0] == "cosine") {
            std::vector<std::int64_t> k;
            for (std::size_t i = 1; i < head.size(); ++i)
                k.push_back(Config::to_int("charfn.weight", head[i]));
            weight = Observable::coordinate_cosine(base, k);
        } else if (!head.empty() && head[0] == "symbol" && head.size() == 2) {
            weight = Observable::coordinate_symbol(base, Config::to_int("charfn.weight", head[1]));
        } else if (!head.empty() && head[0] == "constant" && head.size() == 2) {
            weight = Observable::constant(Config::to_double("charfn.weight", head[1]));
        } else {
            weight = build::event("charfn.weight", spec, base);
        }
        const auto opts = estimate_options();
        cfg_.reject_unused("experiment kind char_fn");
        const CharFnResult r = std::visit(
            [&](const auto& src) {
                return char_fn_estimate(src, *s.scheme, t, *weight, n, n_samples, stream(kEstimation), opts);
            },
            *s.source);
        Outcome out;
        out.report = {{"N", n},
                      {"n_samples", n_samples},
                      {"estimate", {r.estimate.real(), r.estimate.imag()}},
                      {"target", {r.target.real(), r.target.imag()}},
                      {"deviation", r.deviation},
                      {"std_error", {r.se_real, r.se_imag}},
                      {"tolerance", r.tolerance},
                      {"pass", r.pass}};
        out.report["extras"] = Json{{"t", t}, {"phi_mean", r.phi_mean}, {"phi_exact", r.phi_exact}};
        attach(out, s);
        return out;
    }

    static bool unimodular(const CocycleGenerator& gen)
    {
        auto near_one = [](const Matrix& m) { return std::abs(std::abs(m.determinant()) - 1.0) < 1e-12; };
        if (const auto* c = std::get_if<generator::Constant>(&gen.kind()))
            return near_one(c->matrix);
        if (const auto* t = std::get_if<generator::SymbolTable>(&gen.kind()))
            return std::all_of(t->matrices.begin(), t->matrices.end(), near_one);
        return false;
    }

    Outcome spectrum()
    {
        const PhaseSpaceSystem sys = build::system(cfg_, "system", true);
        const MatrixCocycle coc = build::cocycle(cfg_, sys);
        const auto steps = cfg_.get_int("lyapunov.steps", 10000);
        const auto orbits = static_cast<std::size_t>(cfg_.get_int("lyapunov.orbits", 16));
        const auto burn_in = cfg_.get_int("lyapunov.burn_in", 64);
        std::optional<std::vector<double>> expected;
        double tol = 0.0;
        if (cfg_.has("lyapunov.expected")) {
            expected = cfg_.get_doubles("lyapunov.expected");
            tol = cfg_.get_double("lyapunov.tolerance", 1e-6);
            if (expected->size() != static_cast<std::size_t>(coc.dimension()))
                throw ConfigError("lyapunov.expected must list one exponent per dimension");
        }
        cfg_.reject_unused("experiment kind spectrum");
        const LyapunovEstimate est =
            lyapunov_spectrum(coc, steps, orbits, stream(kEstimation), {burn_in, options_.workers});

        Outcome out;
        bool pass = est.converged;
        double deviation = 0.0;
        Json extras{{"converged", est.converged},
                    {"time_normalization", est.time_normalization},
                    {"orbits", orbits},
                    {"burn_in", burn_in},
                    {"seeds_used", est.seeds_used}};
        if (expected) {
            for (std::size_t i = 0; i < expected->size(); ++i)
                deviation = std::max(deviation, std::abs(est.exponents[i] - (*expected)[i]));
            pass = pass && deviation <= tol;
        }
        if (unimodular(coc.generator())) {
            const auto [sum, se] = sum_and_se(est.per_orbit, [](const std::vector<double>& e) {
                return std::accumulate(e.begin(), e.end(), 0.0);
            });
            const bool ok = std::abs(sum) <= 3.0 * se + 1e-12;
            extras["sum_check"] = Json{{"sum", sum}, {"std_error", se}, {"pass", ok}};
            pass = pass && ok;
        }
        out.report = {{"N", steps},
                      {"n_samples", orbits},
                      {"estimate", est.exponents},
                      {"target", expected ? Json(*expected) : Json(nullptr)},
                      {"deviation", deviation},
                      {"std_error", est.standard_errors},
                      {"tolerance", expected ? Json(tol) : Json(nullptr)},
                      {"pass", pass}};
        out.report["extras"] = std::move(extras);
        if (!est.converged)
            out.exit_code = exit_code::numerical;
        return out;
    }

    template <typename Fn>
    static std::pair<double, double> sum_and_se(const std::vector<std::vector<double>>& per_orbit, Fn&& fn)
    {
        RunningMoments m;
        for (const auto& orbit : per_orbit)
            m.add(fn(orbit));
        return {m.mean(), m.std_error()};
    }

    Outcome zorich()
    {
        std::vector<int> perm;
        for (auto v : cfg_.get_ints("zorich.permutation"))
            perm.push_back(static_cast<int>(v));
        const auto orbits = static_cast<std::size_t>(cfg_.get_int("zorich.orbits", 20));
        const auto steps = cfg_.get_int("zorich.steps", 100000);
        const auto burn_in = cfg_.get_int("zorich.burn_in", 64);
        const bool require_gap = cfg_.get_bool("zorich.require_gap", perm.size() >= 4);
        std::optional<std::uint64_t> replicate;
        if (cfg_.has("zorich.replicate_seed"))
            replicate = cfg_.get_u64("zorich.replicate_seed", 0);
        cfg_.reject_unused("experiment kind zorich_spectrum");

        const ZorichOptions zopts{burn_in, options_.workers};
        const ZorichSpectrum z = zorich_spectrum(perm, orbits, steps, stream(kEstimation), zopts);
        const auto& est = z.estimate;
        const std::size_t d = est.exponents.size();
        Outcome out;
        bool pass = est.converged;
        double worst_symmetry = 0.0;
        Json pairs = Json::array();
        for (std::size_t i = 0; i < d / 2; ++i) {
            const std::size_t j = d - 1 - i;
            const auto [sum, se] = sum_and_se(est.per_orbit, [&](const std::vector<double>& e) { return e[i] + e[j]; });
            const bool ok = std::abs(sum) <= 3.0 * se;
            pass = pass && ok;
            worst_symmetry = std::max(worst_symmetry, std::abs(sum));
            pairs.push_back(Json{{"i", i + 1}, {"j", j + 1}, {"sum", sum}, {"std_error", se}, {"pass", ok}});
        }
        Json extras{{"pairs", std::move(pairs)},
                    {"ratios", z.ratios},
                    {"surviving", z.surviving},
                    {"aborted", z.aborted},
                    {"time_normalization", est.time_normalization},
                    {"permutation", perm},
                    {"converged", est.converged}};
        if (d >= 2 && require_gap) {
            const auto [gap, se] = sum_and_se(est.per_orbit, [](const std::vector<double>& e) { return e[0] - e[1]; });
            const bool ok = d >= 2 && est.exponents[1] > 0 && gap > 5.0 * se;
            extras["gap"] = Json{{"theta1_minus_theta2", gap}, {"std_error", se}, {"pass", ok}};
            pass = pass && ok;
        }
        if (replicate) {
            const ZorichSpectrum other = zorich_spectrum(perm, orbits, steps, Stream(*replicate).split(kEstimation), zopts);
            bool ok = true;
            double worst = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                const double se = std::hypot(est.standard_errors[i], other.estimate.standard_errors[i]);
                const double dev = std::abs(est.exponents[i] - other.estimate.exponents[i]);
                worst = std::max(worst, dev / se);
                ok = ok && dev <= 3.0 * se;
            }
            extras["replicate"] = Json{{"seed", *replicate},
                                       {"exponents", other.estimate.exponents},
                                       {"standard_errors", other.estimate.standard_errors},
                                       {"max_deviation_in_se", worst},
                                       {"pass", ok}};
            pass = pass && ok;
        }
        if (!z.abort_reasons.empty())
            out.report["warnings"] = z.abort_reasons;
        out.report.update(Json{{"N", steps},
                               {"n_samples", orbits},
                               {"estimate", est.exponents},
                               {"target", nullptr},
                               {"deviation", worst_symmetry},
                               {"std_error", est.standard_errors},
                               {"pass", pass}});
        out.report["extras"] = std::move(extras);
        return out;
    }

    //-----------------------------------------------------------------------//
    // Hypothesis diagnostics
    //-----------------------------------------------------------------------//

    static Json na(const std::string& why) { return Json{{"status", "not_applicable"}, {"reason", why}}; }
    static const char* status(bool ok) { return ok ? "pass" : "fail"; }

    Outcome hypothesis_sections(bool strict)
    {
        const PhaseSpaceSystem sys = build::system(cfg_, "system", true);
        std::optional<Observable> f;
        if (cfg_.has_section("observable"))
            f = build::observable(cfg_, sys);
        std::optional<MatrixCocycle> coc;
        if (cfg_.has_section("cocycle"))
            coc = build::cocycle(cfg_, sys);
        std::optional<Section> sec;
        if (cfg_.has_section("section"))
            sec = build::section(cfg_);
        std::optional<CompanionCocycle> comp;
        if (cfg_.has_section("companion_cocycle")) {
            const std::string kind = cfg_.get_string("companion_cocycle.kind");
            if (kind == "identity_transport")
                comp = CompanionCocycle::identity_transport();
            else if (kind == "custom")
                comp = CompanionCocycle::custom(
                    CocycleGenerator::constant(build::matrix("companion_cocycle.matrix",
                                                             cfg_.get_string("companion_cocycle.matrix"))));
            else
                throw ConfigError("companion_cocycle.kind '" + kind + "' is not one of identity_transport, custom");
        }
        const auto n_max = static_cast<std::size_t>(cfg_.get_int("check.n_max", 1000));
        if (n_max < 10 || n_max > 10000)
            throw ConfigError("check.n_max must lie in 10..10000");
        const auto directions = static_cast<std::size_t>(cfg_.get_int("check.directions", 100));
        const auto n_bound = static_cast<std::size_t>(cfg_.get_int("check.samples", 1000));
        const double growth_tol = cfg_.get_double("check.growth_tolerance", 0.01);
        std::optional<double> expected_slope;
        double slope_tol = 0.05;
        if (cfg_.has("check.expected_slope")) {
            expected_slope = cfg_.get_double("check.expected_slope");
            slope_tol = cfg_.get_double("check.slope_tolerance", 0.05);
        }
        const bool identities = cfg_.get_bool("check.identities", false);
        const std::string normalizing = cfg_.get_string("scheme.normalizing", "sqrt");
        if (strict) {
            (void)cfg_.get_string("experiment.kind");
            cfg_.reject_unused("experiment kind hypothesis_check");
        }
        const Stream base = stream(kCheck);

        Json sections = Json::object();
        bool pass = true;
        bool numerical_failure = false;
        auto record = [&](const std::string& key, Json section) {
            if (section["status"] == "fail")
                pass = false;
            sections[key] = std::move(section);
        };

        // Contraction of (T, U): both the limit and the exponential rate.
        if (sys.has_companion()) {
            Stream s = base.split(0);
            const Point x = sample_measure(sys, s);
            const ContractionProfile p = contraction_profile(sys, x, n_max);
            const double first = p.distances.front();
            const double last = p.distances.back();
            bool ok = last == 0.0 || last <= 1e-10 * first;
            Json section{{"point", point_json(x)},
                         {"first", first},
                         {"last", last},
                         {"limit_zero", ok},
                         {"rate", p.slope ? Json(*p.slope) : Json(nullptr)},
                         {"fit_window", p.window},
                         {"hyperbolic", p.slope && *p.slope < 0.0}};
            if (expected_slope) {
                const bool slope_ok = p.slope && std::abs(*p.slope / *expected_slope - 1.0) <= slope_tol;
                section["expected_slope"] = *expected_slope;
                section["slope_tolerance"] = slope_tol;
                section["slope_pass"] = slope_ok;
                ok = ok && slope_ok;
            }
            section["status"] = status(ok);
            record("contraction", std::move(section));
        } else {
            record("contraction", na("system has no companion map"));
        }

        // (T, U, V)-adaptedness of the observable: the ratio to V_N must decay.
        if (sys.has_companion() && f) {
            Stream s = base.split(1);
            const Point x = sample_measure(sys, s);
            const Normalizing norm{normalizing == "linear" ? Normalizing::Kind::linear : Normalizing::Kind::sqrt, {}};
            const NormalizingScheme scheme(Averaging{}, norm, ReferenceLaw::dirac_at_zero());
            const AdaptednessProfile p = adaptedness_profile(sys, *f, x, n_max, scheme);
            const double at_end = p.ratios.back();
            const double at_tenth = p.ratios[n_max / 10];
            const bool ok = p.partial_sums.back() == 0.0 || at_end <= 0.5 * at_tenth;
            record("adaptedness", Json{{"status", status(ok)},
                                       {"point", point_json(x)},
                                       {"final_partial_sum", p.partial_sums.back()},
                                       {"ratio_at_tenth", at_tenth},
                                       {"ratio_at_end", at_end},
                                       {"normalizing", normalizing}});
        } else {
            record("adaptedness", na(f ? "system has no companion map" : "no observable configured"));
        }

        if (coc) {
            const BoundednessReport b = boundedness_check(*coc, n_bound, base.split(2), options_.workers);
            if (!b.pass)
                numerical_failure = true;
            Json section{{"status", status(b.pass)},          {"bound", b.bound},
                         {"max_forward", b.max_forward},      {"mean_forward", b.mean_forward},
                         {"max_backward", b.max_backward},    {"mean_backward", b.mean_backward},
                         {"samples", n_bound}};
            if (!b.pass)
                section["witness"] = b.witness;
            record("boundedness", std::move(section));

            auto splitting = [&](SplittingKind kind, std::uint64_t id, const Section* sp, const CompanionCocycle* cp) {
                const SplittingSummary sum =
                    splitting_trials(*coc, kind, directions, n_max, base.split(id), options_.workers, sp, cp);
                const bool ok = sum.max_growth < growth_tol;
                return Json{{"status", status(ok)},
                            {"trials", sum.trials},
                            {"n_max", n_max},
                            {"max_final_decade_growth", sum.max_growth},
                            {"growth_tolerance", growth_tol},
                            {"max_running_max", sum.max_running_max},
                            {"mean_final_running_max", sum.mean_final}};
            };
            if (coc->dimension() >= 2) {
                record("dominated_splitting", splitting(SplittingKind::dominated, 3, nullptr, nullptr));
                record("strong_splitting", splitting(SplittingKind::strong, 4, nullptr, nullptr));
            } else {
                record("dominated_splitting", na("cocycle dimension is 1"));
                record("strong_splitting", na("cocycle dimension is 1"));
            }
            if (sec)
                record("section_genericity", splitting(SplittingKind::section, 5, &*sec, nullptr));
            else
                record("section_genericity", na("no section configured"));
            if (coc->base().has_companion()) {
                const CompanionCocycle c = comp.value_or(CompanionCocycle::identity_transport());
                record("cocycle_adaptedness", splitting(SplittingKind::cocycle_adapted, 6, nullptr, &c));
            } else {
                record("cocycle_adaptedness", na("cocycle base has no companion map"));
            }
        } else {
            for (const char* key : {"boundedness", "dominated_splitting", "strong_splitting", "section_genericity",
                                    "cocycle_adaptedness"})
                record(key, na("no cocycle configured"));
        }

        if (identities) {
            Json section = Json::object();
            bool ok = true;
            auto add = [&](const char* key, double error, double limit) {
                section[key] = Json{{"error", error}, {"limit", limit}, {"pass", error <= limit}};
                ok = ok && error <= limit;
            };
            if (coc) {
                add("cocycle_identity", cocycle_identity_error(*coc, 1000, 40, base.split(7)), 1e-9);
                add("exterior_determinant", exterior_det_error(*coc, 1000, 20, base.split(8)), 1e-8);
                add("renormalization_transparency", renorm_transparency_error(*coc, 1000, 20, base.split(9)), 1e-8);
            }
            if (f) {
                // Raw sums (A_N = 0, V_N = 1): the strictest form of the identity.
                const NormalizingScheme raw(Averaging{}, Normalizing{Normalizing::Kind::table, std::vector<double>(10000, 1.0)},
                                            ReferenceLaw::dirac_at_zero());
                add("time_reversal", time_reversal_error(sys, *f, raw, {1, 10, 100, 1000, 10000}, 10, base.split(10)),
                    1e-9);
            }
            section["status"] = status(ok);
            record("identities", std::move(section));
        }

        Outcome out;
        out.report = Json{{"N", n_max}, {"n_samples", directions}, {"pass", pass}, {"sections", std::move(sections)}};
        if (!pass)
            out.exit_code = exit_code::numerical;
        if (numerical_failure)
            out.exit_code = exit_code::numerical;
        return out;
    }

    Config cfg_;
    RunOptions options_;
    std::uint64_t seed_ = 1;
    Stream root_{1};
    std::string name_;
};

}  // namespace detail

// Execute `cfg` as a run (or hypothesis check) and return the report; throws on errors.
inline Outcome execute(Config cfg, const RunOptions& options, bool check_mode)
{
    detail::Experiment experiment(std::move(cfg), options);
    return check_mode ? experiment.check() : experiment.run();
}

inline std::string format_csv_value(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Write the JSON report and optional CSV dumps; returns the report path.
inline std::filesystem::path write_outcome(const Outcome& outcome, const std::filesystem::path& out_dir,
                                           bool check_mode)
{
    std::filesystem::create_directories(out_dir);
    const std::string name = outcome.report.value("experiment", std::string("report"));
    const auto path = out_dir / (name + (check_mode ? ".check.json" : ".json"));
    std::ofstream(path) << outcome.report.dump(2) << "\n";
    for (const auto& dump : outcome.dumps) {
        std::ofstream csv(out_dir / (name + dump.suffix + ".csv"));
        csv << dump.header << "\n";
        for (std::size_t i = 0; i < dump.values.size(); ++i)
            csv << i << "," << format_csv_value(dump.values[i]) << "\n";
    }
    return path;
}

}  // namespace mixlt
