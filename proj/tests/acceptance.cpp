// Acceptance run: one PASS/FAIL line per criterion. Tolerances and runtime limits are fixed here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "mixlt/runner.hpp"

using namespace mixlt;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what)
    {
        if (!detail.empty())
            detail += "; ";
        detail += (ok ? "" : "FAILED ") + what;
        pass = pass && ok;
    }
};

std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

Config preset(const std::string& name)
{
    return Config::load(std::filesystem::path(MIXLT_PRESET_DIR) / (name + ".cfg"));
}

struct Timed {
    Outcome outcome;
    double seconds = 0.0;
};

Timed run_preset(const std::string& name, unsigned workers = 1, bool dump = false)
{
    const auto start = Clock::now();
    Outcome out = execute(preset(name), {std::nullopt, workers, dump}, false);
    return {std::move(out), std::chrono::duration<double>(Clock::now() - start).count()};
}

template <typename F>
double seconds_of(F&& f)
{
    const auto start = Clock::now();
    f();
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void runtime(Verdict& v, double seconds, double limit)
{
    v.require(seconds <= limit, "runtime " + fmt(seconds) + " s <= " + fmt(limit) + " s");
}

// max(0.02, 5 SE) rule recomputed from the report.
void event_rule(Verdict& v, const Json& r)
{
    const double se = r["std_error"].get<double>();
    const double dev = std::abs(r["estimate"].get<double>() - r["target"].get<double>());
    v.require(dev <= std::max(0.02, 5.0 * se), "deviation " + fmt(dev) + " <= max(0.02, 5 SE = " + fmt(5 * se) + ")");
}

Verdict exact_identities()
{
    Verdict v;
    const Config cfg = preset("criterion-1");
    const PhaseSpaceSystem sys = build::system(cfg, "system", true);
    const Observable f = build::observable(cfg, sys);
    const MatrixCocycle coc = build::cocycle(cfg, sys);
    const PhaseSpaceSystem shift = PhaseSpaceSystem::two_sided_shift({0.5, 0.5});
    const Observable x0 = Observable::coordinate_symbol(shift, 0);
    const Stream root(1);
    const NormalizingScheme raw(Averaging{}, Normalizing{Normalizing::Kind::table, std::vector<double>(10000, 1.0)},
                                ReferenceLaw::dirac_at_zero());

    double err = 0.0;
    double t = seconds_of([&] { err = cocycle_identity_error(coc, 1000, 40, root.split(1)); });
    v.require(err <= 1e-9, "cocycle identity " + fmt(err) + " <= 1e-9");
    runtime(v, t, 1.0);

    const std::vector<std::int64_t> ns{1, 10, 100, 1000, 10000};
    t = seconds_of([&] {
        err = std::max(time_reversal_error(sys, f, raw, ns, 10, root.split(2)),
                       time_reversal_error(shift, x0, raw, ns, 10, root.split(3)));
    });
    v.require(err <= 1e-9, "time reversal " + fmt(err) + " <= 1e-9");
    runtime(v, t, 1.0);

    t = seconds_of([&] { err = exterior_det_error(coc, 1000, 20, root.split(4)); });
    v.require(err <= 1e-8, "exterior determinant " + fmt(err) + " <= 1e-8");
    runtime(v, t, 1.0);

    t = seconds_of([&] { err = renorm_transparency_error(coc, 1000, 20, root.split(5)); });
    v.require(err <= 1e-8, "renormalization transparency " + fmt(err) + " <= 1e-8");
    runtime(v, t, 1.0);
    return v;
}

Verdict dirac_dlt()
{
    Verdict v;
    const auto [out, t] = run_preset("criterion-2");
    const Json& r = out.report;
    v.require(r["N"] == 10000 && r["n_samples"] == 10000, "N = n = 10^4");
    v.require(r["extras"].contains("lyapunov_prior"), "A_N from a prior spectrum run");
    const double outside = 1.0 - r["estimate"].get<double>();
    v.require(outside <= 0.02, "mass outside (-0.05, 0.05) " + fmt(outside) + " <= 0.02");
    runtime(v, t, 120.0);
    return v;
}

Verdict plain_clt()
{
    Verdict v;
    const auto [out, t] = run_preset("criterion-3");
    const Json& r = out.report;
    v.require(r["N"] == 10000 && r["n_samples"] == 100000, "N = 10^4, n = 10^5");
    const double ks = r["extras"]["ks"].get<double>();
    v.require(ks <= 0.02, "ks " + fmt(ks) + " <= 0.02");
    runtime(v, t, 120.0);
    return v;
}

Verdict conditional_dlt()
{
    Verdict v;
    const auto [out, t] = run_preset("criterion-4");
    const Json& r = out.report;
    v.require(r["extras"]["mass_a"].get<double>() == 0.5, "mu(A) = 1/2");
    v.require(r["extras"]["interval"]["lower"] == -1.0 && r["extras"]["interval"]["upper"] == 1.0, "interval (-1, 1)");
    event_rule(v, r);
    runtime(v, t, 180.0);
    return v;
}

Verdict mixing_dlt()
{
    Verdict v;
    const auto [out, t] = run_preset("criterion-5");
    const Json& r = out.report;
    v.require(r["N"] == 2000 && r["n_samples"] == 1000000, "N = 2000, n = 10^6");
    v.require(r["extras"]["mass_a"].get<double>() == 0.5 && r["extras"]["mass_b"].get<double>() == 0.5,
              "half-box events");
    v.require(r["extras"].contains("green_kubo"), "Green-Kubo variance");
    event_rule(v, r);
    runtime(v, t, 600.0);
    return v;
}

Verdict mixing_correlation()
{
    Verdict v;
    const auto [out, t] = run_preset("criterion-6");
    const Json& r = out.report;
    v.require(r["n_samples"] == 1000000, "n = 10^6");
    std::vector<std::int64_t> seen;
    for (const auto& row : r["extras"]["per_N"]) {
        seen.push_back(row["N"].get<std::int64_t>());
        const double dev = std::abs(row["estimate"].get<double>() - 0.25);
        v.require(dev <= 0.005, "N = " + std::to_string(seen.back()) + " |mu - 1/4| " + fmt(dev) + " <= 0.005");
    }
    v.require(seen == std::vector<std::int64_t>{25, 50}, "N in {25, 50}");
    runtime(v, t, 120.0);
    return v;
}

Verdict diagnostics()
{
    Verdict v;
    const auto [out, t] = run_preset("criterion-7");
    const auto& s = out.report["sections"];
    const double expected = std::log((3.0 - std::sqrt(5.0)) / 2.0);
    const auto& c = s["contraction"];
    const double rate = c["rate"].is_number() ? c["rate"].get<double>() : 0.0;
    v.require(std::abs(rate / expected - 1.0) <= 0.05, "contraction slope " + fmt(rate) + " vs " + fmt(expected));
    for (const char* key : {"dominated_splitting", "strong_splitting"}) {
        const auto& sec = s[key];
        const double growth = sec["max_final_decade_growth"].get<double>();
        v.require(sec["n_max"] == 10000 && sec["trials"] == 100, std::string(key) + " N <= 10^4 on 100 directions");
        v.require(growth < 0.01, std::string(key) + " final-decade growth " + fmt(growth) + " < 1%");
    }
    runtime(v, t, 300.0);
    return v;
}

Verdict spectra()
{
    Verdict v;
    const double ln3 = std::log(3.0);
    const double cat = std::log((3.0 + std::sqrt(5.0)) / 2.0);
    const auto diag = run_preset("criterion-8").outcome.report["estimate"].get<std::vector<double>>();
    const std::vector<double> diag_oracle{ln3, 0.0, -ln3};
    double worst = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
        worst = std::max(worst, std::abs(diag[i] - diag_oracle[i]));
    v.require(worst <= 1e-9, "diag(3,1,1/3) error " + fmt(worst) + " <= 1e-9");

    const auto cat_report = run_preset("criterion-8-catmap").outcome.report;
    const auto cat_est = cat_report["estimate"].get<std::vector<double>>();
    worst = std::max(std::abs(cat_est[0] - cat), std::abs(cat_est[1] + cat));
    v.require(worst <= 1e-6, "cat map error " + fmt(worst) + " <= 1e-6");

    for (const Json& r : {cat_report, run_preset("criterion-8-shear").outcome.report}) {
        const auto est = r["estimate"].get<std::vector<double>>();
        const auto se = r["std_error"].get<std::vector<double>>();
        // SE of the sum comes from the per-orbit sums; 1e-12 absorbs rounding when every orbit agrees exactly.
        const double sum = r["extras"]["sum_check"]["sum"].get<double>();
        const double sum_se = r["extras"]["sum_check"]["std_error"].get<double>();
        v.require(std::abs(est[0] + est[1] - sum) <= 1e-12 && std::abs(sum) <= 3.0 * sum_se + 1e-12,
                  r["experiment"].get<std::string>() + " SL(2) sum " + fmt(sum) + " within 3 SE (" + fmt(sum_se) + ")");
    }
    return v;
}

using Big = boost::multiprecision::cpp_bin_float_100;

std::int64_t isqrt(std::int64_t n)
{
    auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(n)));
    while (r * r > n)
        --r;
    while ((r + 1) * (r + 1) <= n)
        ++r;
    return r;
}

Verdict zorich()
{
    Verdict v;
    double t = seconds_of([&] {
        // d = 2: run lengths of the rotation with ratio sqrt(D) against the integer recurrence.
        std::size_t matched = 0, checked = 0;
        for (std::int64_t d = 2; checked < 20; ++d) {
            const std::int64_t s = isqrt(d);
            if (s * s == d)
                continue;
            ++checked;
            std::int64_t p = 0, q = 1;
            const Big y = boost::multiprecision::sqrt(Big(d));
            RauzyState<Big> state(IET<Big>({2, 1}, {1 / (1 + y), y / (1 + y)}));
            bool all = true;
            for (int k = 0; k < 30; ++k) {
                const std::int64_t a = (p + s) / q;
                p = a * q - p;
                q = (d - p * p) / q;
                all = all && state.zorich_step().length == a;
            }
            matched += all ? 1 : 0;
        }
        v.require(matched == 20, "d = 2 run lengths match 30 quotients for " + std::to_string(matched) + "/20 irrationals");
    });
    const auto [out, t4] = run_preset("criterion-9");
    t += t4;
    const Json& r = out.report;
    v.require(r["extras"]["permutation"] == std::vector<int>{4, 3, 2, 1}, "permutation (4321)");
    const auto theta = r["estimate"].get<std::vector<double>>();
    const auto se = r["std_error"].get<std::vector<double>>();
    for (const auto& pair : r["extras"]["pairs"]) {
        const double sum = pair["sum"].get<double>();
        const double pse = pair["std_error"].get<double>();
        v.require(std::abs(sum) <= 3.0 * pse, "pair sum " + fmt(sum) + " within 3 SE (" + fmt(pse) + ")");
    }
    const double gap = theta[0] - theta[1];
    const double gap_se = r["extras"]["gap"]["std_error"].get<double>();
    v.require(gap > 5.0 * gap_se, "theta1 - theta2 " + fmt(gap) + " > 5 SE (" + fmt(5 * gap_se) + ")");
    const auto& rep = r["extras"]["replicate"];
    const auto theta_b = rep["exponents"].get<std::vector<double>>();
    const auto se_b = rep["standard_errors"].get<std::vector<double>>();
    double worst = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i)
        worst = std::max(worst, std::abs(theta[i] - theta_b[i]) / std::hypot(se[i], se_b[i]));
    v.require(worst <= 3.0, "second seed agrees within " + fmt(worst) + " <= 3 combined SE");
    runtime(v, t, 600.0);
    return v;
}

Verdict determinism()
{
    Verdict v;
    for (const char* name : {"criterion-10", "criterion-6", "criterion-8-shear", "criterion-9"}) {
        const auto one = run_preset(name, 1, true).outcome;
        const auto four = run_preset(name, 4, true).outcome;
        bool same = one.report.dump(2) == four.report.dump(2) && one.dumps.size() == four.dumps.size();
        for (std::size_t i = 0; same && i < one.dumps.size(); ++i)
            for (std::size_t j = 0; same && j < one.dumps[i].values.size(); ++j)
                same = format_csv_value(one.dumps[i].values[j]) == format_csv_value(four.dumps[i].values[j]);
        v.require(same, std::string(name) + " identical for 1 and 4 workers");
    }
    return v;
}

}  // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"1 exact identities", exact_identities},
        {"2 plain DLT, Dirac law", dirac_dlt},
        {"3 plain CLT", plain_clt},
        {"4 conditional DLT", conditional_dlt},
        {"5 mixing DLT", mixing_dlt},
        {"6 mixing correlation", mixing_correlation},
        {"7 hypothesis diagnostics", diagnostics},
        {"8 spectrum checks", spectra},
        {"9 Zorich surrogate", zorich},
        {"10 determinism", determinism},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        Verdict v;
        try {
            v = check();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail = std::string("error: ") + e.what();
        }
        failures += v.pass ? 0 : 1;
        std::printf("%s criterion %s: %s\n", v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
