// Command-line runner: mixlt run|check <config> [--out DIR] [--seed U64] [--workers N] [--dump-samples]

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "mixlt/runner.hpp"

#ifndef MIXLT_PRESET_DIR
#define MIXLT_PRESET_DIR "presets"
#endif

namespace {

// "preset/<name>" resolves against $MIXLT_PRESET_DIR, then the build-time preset directory.
std::filesystem::path resolve_config(const std::string& arg)
{
    const std::string prefix = "preset/";
    if (!arg.starts_with(prefix))
        return arg;
    const std::string name = arg.substr(prefix.size()) + ".cfg";
    if (const char* env = std::getenv("MIXLT_PRESET_DIR")) {
        const std::filesystem::path candidate = std::filesystem::path(env) / name;
        if (std::filesystem::exists(candidate))
            return candidate;
    }
    const std::filesystem::path built = std::filesystem::path(MIXLT_PRESET_DIR) / name;
    if (std::filesystem::exists(built))
        return built;
    if (std::filesystem::exists(arg))
        return arg;
    throw mixlt::ConfigError("unknown preset '" + arg + "'");
}

int execute(const std::string& config_arg, const std::filesystem::path& out_dir, const mixlt::RunOptions& options,
            bool check_mode)
{
    try {
        const mixlt::Config cfg = mixlt::Config::load(resolve_config(config_arg));
        const mixlt::Outcome outcome = mixlt::execute(cfg, options, check_mode);
        const auto path = mixlt::write_outcome(outcome, out_dir, check_mode);
        const auto& r = outcome.report;
        std::cout << (r.value("pass", false) ? "PASS " : "FAIL ") << r.value("experiment", std::string()) << "  ";
        if (r.contains("deviation"))
            std::cout << "deviation=" << r["deviation"].dump() << " tolerance=" << r.value("tolerance", mixlt::Json()).dump()
                      << "  ";
        std::cout << "report=" << path.string() << "\n";
        if (r.contains("sections"))
            for (const auto& [key, section] : r["sections"].items())
                std::cout << "  " << key << ": " << section.value("status", std::string("?")) << "\n";
        return outcome.exit_code;
    } catch (const mixlt::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return mixlt::exit_code::config;
    } catch (const mixlt::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return mixlt::exit_code::numerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return mixlt::exit_code::numerical;
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Distributional limit theorem experiments for dynamical systems and matrix cocycles"};
    app.set_version_flag("--version", std::string(mixlt::kVersion));
    app.require_subcommand(1);

    std::string config;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    unsigned workers = 1;
    bool dump = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", config, "config file or preset/<name>")->required();
        sub->add_option("--out", out_dir, "output directory for reports");
        sub->add_option("--seed", seed, "override experiment.seed");
        sub->add_option("--workers", workers, "worker threads")->check(CLI::Range(1u, 1024u));
        sub->add_flag("--dump-samples", dump, "write raw samples as CSV");
    };
    auto* run = app.add_subcommand("run", "run an experiment");
    add_common(run);
    auto* check = app.add_subcommand("check", "run hypothesis diagnostics");
    add_common(check);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : mixlt::exit_code::config;
    }

    mixlt::RunOptions options;
    options.workers = workers;
    options.dump_samples = dump;
    if (app.got_subcommand(run) ? run->count("--seed") : check->count("--seed"))
        options.seed = seed;
    return execute(config, out_dir, options, app.got_subcommand(check));
}
