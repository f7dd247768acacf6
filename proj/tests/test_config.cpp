#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mixlt/runner.hpp"

using namespace mixlt;

namespace {

Outcome run_text(const std::string& text, RunOptions options = {}, bool check = false)
{
    return execute(Config::parse(text), options, check);
}

std::string preset(const std::string& name)
{
    std::ifstream in(std::filesystem::path(MIXLT_PRESET_DIR) / (name + ".cfg"));
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

const char* kConstant = R"(
[experiment]
kind = plain_dlt
N = 10 1000
samples = 300

[system]
kind = torus_automorphism
matrix = 2 1; 1 1

[observable]
kind = constant
value = 3.5

[scheme]
averaging = mean
normalizing = linear
law = dirac_at_zero
)";

}  // namespace

TEST(Parser, SectionsKeysAndComments)
{
    const Config cfg = Config::parse("# top\n[experiment]\nkind = plain_dlt  # trailing\nN = 1, 2 3\n\n[system]\n"
                                     "kind=two_sided_shift\n");
    EXPECT_EQ(cfg.get_string("experiment.kind"), "plain_dlt");
    EXPECT_EQ(cfg.get_ints("experiment.N"), (std::vector<std::int64_t>{1, 2, 3}));
    EXPECT_EQ(cfg.get_string("system.kind"), "two_sided_shift");
    EXPECT_EQ(cfg.get_int("experiment.samples", 7), 7);
    EXPECT_EQ(cfg.resolved().at("experiment.samples"), "7");
}

TEST(Parser, Strictness)
{
    EXPECT_THROW(Config::parse("[nonsense]\n"), ConfigError);
    EXPECT_THROW(Config::parse("[experiment]\nbogus = 1\n"), ConfigError);
    EXPECT_THROW(Config::parse("kind = x\n"), ConfigError);
    EXPECT_THROW(Config::parse("[experiment]\nkind\n"), ConfigError);
    EXPECT_THROW(Config::parse("[experiment\n"), ConfigError);
    EXPECT_THROW(Config::parse("[experiment]\nkind = a\nkind = b\n"), ConfigError);
    try {
        (void)Config::parse("[experiment]\nsamplez = 10\n");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("experiment.samplez"), std::string::npos);
    }
}

TEST(Parser, Types)
{
    const Config cfg = Config::parse("[experiment]\nsamples = 1e6\nN = 2.5\nseed = -3\ntolerance = abc\n"
                                     "[check]\nidentities = maybe\n");
    EXPECT_EQ(cfg.get_int("experiment.samples"), 1000000);
    EXPECT_THROW((void)cfg.get_int("experiment.N"), TypeError);
    EXPECT_THROW((void)cfg.get_u64("experiment.seed", 1), TypeError);
    EXPECT_THROW((void)cfg.get_double("experiment.tolerance"), TypeError);
    EXPECT_THROW((void)cfg.get_bool("check.identities", false), TypeError);
    EXPECT_THROW((void)cfg.get_string("experiment.kind"), ConfigError);
}

TEST(Runner, ConstantObservableHasZeroDeviation)
{
    const Outcome out = run_text(kConstant);
    EXPECT_EQ(out.exit_code, exit_code::ok);
    EXPECT_TRUE(out.report["pass"].get<bool>());
    EXPECT_EQ(out.report["deviation"].get<double>(), 0.0);
}

TEST(Runner, ReportRecordsConfigAndVersion)
{
    const Outcome out = run_text(kConstant);
    EXPECT_EQ(out.report["version"], kVersion);
    EXPECT_EQ(out.report["config"]["observable.value"], "3.5");
    EXPECT_EQ(out.report["config"]["experiment.seed"], "1");
    EXPECT_EQ(out.report["seed"], 1);
    const Outcome seeded = run_text(kConstant, {42, 1, false});
    EXPECT_EQ(seeded.report["seed"], 42);
}

TEST(Runner, UnusedKeyRejected)
{
    std::string text = kConstant;
    text += "[companion]\nkind = identity\n[zorich]\npermutation = 2 1\n";
    try {
        (void)run_text(text);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("zorich.permutation"), std::string::npos);
    }
}

TEST(Runner, UnknownExperimentKind)
{
    EXPECT_THROW(run_text("[experiment]\nkind = nope\n"), ConfigError);
}

TEST(Runner, ShiftCompanionRejected)
{
    const std::string text = "[experiment]\nkind = hypothesis_check\n[system]\nkind = two_sided_shift\n"
                             "weights = 0.5 0.5\n[companion]\nkind = identity\n";
    EXPECT_THROW(run_text(text), ConfigError);
}

TEST(Check, IdentityCompanionContracts)
{
    const std::string text = "[experiment]\nkind = hypothesis_check\n[system]\nkind = torus_automorphism\n"
                             "matrix = 2 1; 1 1\n[companion]\nkind = identity\n[check]\nn_max = 200\n";
    const Outcome out = run_text(text);
    EXPECT_EQ(out.report["sections"]["contraction"]["status"], "pass");
    EXPECT_EQ(out.report["sections"]["contraction"]["last"].get<double>(), 0.0);
}

TEST(Check, TranslationCompanionOnTranslationFails)
{
    const std::string text = "[experiment]\nkind = hypothesis_check\n[system]\nkind = torus_translation\n"
                             "vector = 0.31 0.17\n[companion]\nkind = translation\nvector = 0.2 0.1\n"
                             "[check]\nn_max = 200\n";
    const Outcome out = run_text(text);
    EXPECT_EQ(out.report["sections"]["contraction"]["status"], "fail");
    EXPECT_FALSE(out.report["pass"].get<bool>());
    EXPECT_NE(out.exit_code, exit_code::ok);
}

TEST(Check, CriterionOnePresetPasses)
{
    const Outcome out = execute(Config::parse(preset("criterion-1")), {}, false);
    EXPECT_TRUE(out.report["pass"].get<bool>()) << out.report.dump(2);
    EXPECT_EQ(out.report["sections"]["identities"]["status"], "pass");
}

TEST(Runner, DeterministicAcrossWorkers)
{
    const Config cfg = Config::parse(preset("criterion-10"));
    const Outcome one = execute(cfg, {std::nullopt, 1, true}, false);
    const Outcome four = execute(cfg, {std::nullopt, 4, true}, false);
    EXPECT_EQ(one.report.dump(), four.report.dump());
    ASSERT_EQ(one.dumps.size(), four.dumps.size());
    for (std::size_t i = 0; i < one.dumps.size(); ++i)
        EXPECT_EQ(one.dumps[i].values, four.dumps[i].values);
}

TEST(Runner, WriteOutcome)
{
    const auto dir = std::filesystem::temp_directory_path() / "mixlt_test_write";
    std::filesystem::remove_all(dir);
    const Outcome out = run_text(kConstant, {std::nullopt, 1, true});
    const auto path = write_outcome(out, dir, false);
    EXPECT_EQ(path.filename(), "plain_dlt.json");
    std::ifstream in(path);
    const Json back = Json::parse(in);
    EXPECT_EQ(back, out.report);
    bool csv = false;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        csv = csv || entry.path().extension() == ".csv";
    EXPECT_TRUE(csv);
    std::filesystem::remove_all(dir);
}
