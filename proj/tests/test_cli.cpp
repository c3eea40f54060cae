#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "complab/cli.hpp"
#include "complab/config.hpp"
#include "complab/errors.hpp"
#include "complab/report.hpp"

namespace complab {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path source_dir() { return COMPLAB_SOURCE_DIR; }
fs::path config_path(const std::string& name) { return source_dir() / "configs" / name; }

class CliTest : public ::testing::Test {
  protected:
    void SetUp() override
    {
        auto const* info = ::testing::UnitTest::GetInstance()->current_test_info();
        root_ = fs::temp_directory_path() / (std::string("complab_") + info->name());
        fs::remove_all(root_);
        fs::create_directories(root_);
    }
    void TearDown() override { fs::remove_all(root_); }

    int invoke(std::vector<std::string> args)
    {
        args.insert(args.begin(), "complab");
        std::vector<const char*> argv;
        for (auto const& a : args) {
            argv.push_back(a.c_str());
        }
        out_.str("");
        err_.str("");
        return run_cli(static_cast<int>(argv.size()), argv.data(), out_, err_);
    }

    fs::path write(const std::string& name, const std::string& content)
    {
        fs::path const p = root_ / name;
        std::ofstream(p) << content;
        return p;
    }

    static json read_json(const fs::path& p)
    {
        std::ifstream in(p);
        return json::parse(in);
    }

    static std::map<std::string, std::string> manifest(const fs::path& dir)
    {
        std::map<std::string, std::string> out;
        json const doc = read_json(dir / "manifest.json");
        for (auto const& e : doc.at("files")) {
            out[e.at("file").get<std::string>()] = e.at("sha256").get<std::string>();
        }
        return out;
    }

    fs::path root_;
    std::ostringstream out_;
    std::ostringstream err_;
};

TEST(Config, EchoRoundTrip)
{
    for (auto const& entry : fs::directory_iterator(source_dir() / "configs")) {
        auto const cfg = load_config(entry.path());
        auto const again = config_from_json(config_to_json(cfg));
        EXPECT_EQ(again, cfg) << entry.path();
        EXPECT_EQ(config_to_json(again), config_to_json(cfg)) << entry.path();
    }
}

TEST(Config, RejectsUnknownKeysAndBadValues)
{
    auto doc = json::parse(R"({"model": {"family": "gbm", "params": {"s0": 100, "sigma": 0.2}},
                               "assets": [{"kind": "european_stock", "payoff": "linear", "maturity": 1}],
                               "seed": 1})");
    EXPECT_NO_THROW(config_from_json(doc));
    auto bad = doc;
    bad["unexpected"] = 1;
    EXPECT_THROW(config_from_json(bad), ConfigError);
    bad = doc;
    bad["mc"] = {{"n_samples", 10}};
    EXPECT_THROW(config_from_json(bad), ConfigError);
}

TEST(Report, Sha256KnownAnswer)
{
    EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_F(CliTest, HeatCompletenessIsComplete)
{
    fs::path const out = root_ / "out";
    int const code = invoke({"completeness", "--config", config_path("heat_squares.json").string(),
                             "--out", out.string()});
    ASSERT_EQ(code, 0) << err_.str();
    auto const report = read_json(out / "report.json");
    EXPECT_EQ(report.at("results").at("verdict"), "COMPLETE");
    EXPECT_EQ(report.at("subcommand"), "completeness");
    EXPECT_TRUE(report.contains("config_hash"));
    EXPECT_TRUE(report.contains("timings_s"));
    auto const files = manifest(out);
    EXPECT_TRUE(files.contains("report.json"));
    EXPECT_TRUE(files.contains("occupation.csv"));
    for (auto const& [name, hash] : files) {
        std::ifstream in(out / name, std::ios::binary);
        std::string const content((std::istreambuf_iterator<char>(in)), {});
        EXPECT_EQ(sha256_hex(content), hash) << name;
    }
    // The embedded echo parses back to the same config.
    auto const cfg = load_config(config_path("heat_squares.json"));
    EXPECT_EQ(config_from_json(report.at("config")), cfg);
}

TEST_F(CliTest, StrictAcceptsLikelyIncomplete)
{
    fs::path const out = root_ / "out";
    int const code = invoke({"completeness", "--strict", "--config",
                             config_path("two_calls.json").string(), "--out", out.string()});
    ASSERT_EQ(code, 0) << err_.str();
    EXPECT_EQ(read_json(out / "results.json").at("verdict"), "LIKELY_INCOMPLETE");
}

TEST_F(CliTest, StrictRejectsInconclusive)
{
    auto doc = read_json(config_path("heat_squares.json"));
    doc["analyticity_assumed"] = false;
    doc["paths"] = {{"n_paths", 50}, {"n_steps", 10}};
    doc["grid"]["nodes"] = {41, 41};
    doc["grid"]["time_steps"] = 40;
    auto const cfg = write("inconclusive.json", doc.dump());
    fs::path const out = root_ / "out";
    EXPECT_EQ(invoke({"completeness", "--config", cfg.string(), "--out", out.string()}), 0);
    EXPECT_EQ(read_json(out / "results.json").at("verdict"), "INCONCLUSIVE");
    EXPECT_EQ(invoke({"completeness", "--strict", "--config", cfg.string(), "--out", out.string()}),
              4);
    auto const err = json::parse(err_.str());
    EXPECT_EQ(err.at("error").at("exit_code"), 4);
}

TEST_F(CliTest, MalformedJsonWritesNothing)
{
    auto const cfg = write("broken.json", R"({"model": {"family": "gbm", )");
    fs::path const out = root_ / "out";
    EXPECT_EQ(invoke({"price", "--config", cfg.string(), "--out", out.string()}), 2);
    EXPECT_FALSE(fs::exists(out) && !fs::is_empty(out));
    auto const err = json::parse(err_.str());
    EXPECT_EQ(err.at("error").at("exit_code"), 2);
}

TEST_F(CliTest, MissingSeedIsConfigError)
{
    auto doc = read_json(config_path("two_calls.json"));
    doc.erase("seed");
    auto const cfg = write("noseed.json", doc.dump());
    fs::path const out = root_ / "out";
    EXPECT_EQ(invoke({"simulate", "--config", cfg.string(), "--out", out.string()}), 2);
    EXPECT_EQ(invoke({"simulate", "--config", cfg.string(), "--out", out.string(), "--seed", "5"}),
              0)
        << err_.str();
    EXPECT_EQ(read_json(out / "report.json").at("seed"), 5);
}

TEST_F(CliTest, UsageErrors)
{
    EXPECT_EQ(invoke({"bogus", "--config", "x.json", "--out", root_.string()}), 2);
    EXPECT_EQ(invoke({"price", "--out", root_.string()}), 2);
}

TEST_F(CliTest, UnwritableOutputIsNumericalFailure)
{
    auto const blocker = write("file", "x");
    EXPECT_EQ(invoke({"simulate", "--config", config_path("two_calls.json").string(), "--out",
                      (blocker / "sub").string()}),
              3);
}

TEST_F(CliTest, HedgeSweepManifest)
{
    auto doc = read_json(config_path("gbm_call_hedge.json"));
    doc["paths"] = {{"n_paths", 500}, {"n_steps", 100}};
    auto const cfg = write("hedge.json", doc.dump());
    fs::path const out = root_ / "out";
    int const code = invoke({"hedge", "--config", cfg.string(), "--out", out.string(),
                             "--sweep-steps", "25,50,100"});
    ASSERT_EQ(code, 0) << err_.str();
    auto const files = manifest(out);
    EXPECT_TRUE(files.contains("report.json"));
    EXPECT_TRUE(files.contains("hedge_errors.csv"));
    EXPECT_TRUE(files.contains("sweep_summary.csv"));
    std::ifstream in(out / "hedge_errors.csv");
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "path,terminal_error,singular_events");
}

TEST_F(CliTest, DumpPaths)
{
    fs::path const out = root_ / "out";
    fs::path const dump = root_ / "paths.csv";
    auto doc = read_json(config_path("two_calls.json"));
    doc["paths"] = {{"n_paths", 3}, {"n_steps", 4}};
    auto const cfg = write("small.json", doc.dump());
    ASSERT_EQ(invoke({"simulate", "--config", cfg.string(), "--out", out.string(), "--dump-paths",
                      dump.string(), "--dump-increments"}),
              0)
        << err_.str();
    std::ifstream in(dump);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "path,step,t,xi_1,xi_2,dW_1,dW_2");
}

TEST_F(CliTest, RerunIsByteIdentical)
{
    auto doc = read_json(config_path("sv_put_completion.json"));
    doc["paths"] = {{"n_paths", 200}, {"n_steps", 100}};
    doc["hedge"]["sweep"] = {25, 50, 100};
    doc["grid"]["nodes"] = {81, 41};
    doc["grid"]["time_steps"] = 200;
    auto const cfg = write("sv.json", doc.dump());
    for (std::string const sub : {"simulate", "price", "completeness", "hedge"}) {
        fs::path const a = root_ / (sub + "_a");
        fs::path const b = root_ / (sub + "_b");
        ASSERT_EQ(invoke({sub, "--config", cfg.string(), "--out", a.string()}), 0) << err_.str();
        ASSERT_EQ(invoke({sub, "--config", cfg.string(), "--out", b.string()}), 0) << err_.str();
        auto ma = manifest(a);
        auto mb = manifest(b);
        ma.erase("report.json");  // wall-clock timings
        mb.erase("report.json");
        EXPECT_FALSE(ma.empty());
        EXPECT_EQ(ma, mb) << sub;
    }
}

TEST_F(CliTest, EverySubcommandRuns)
{
    auto doc = read_json(config_path("gbm_varswap.json"));
    doc["paths"] = {{"n_paths", 100}, {"n_steps", 50}};
    auto const gbm_cfg = write("gbm.json", doc.dump());
    auto calls = read_json(config_path("two_calls.json"));
    calls["paths"] = {{"n_paths", 200}, {"n_steps", 20}};
    auto const calls_cfg = write("calls.json", calls.dump());
    std::vector<std::pair<std::string, fs::path>> const runs{
        {"validate", gbm_cfg}, {"simulate", gbm_cfg}, {"price", gbm_cfg},
        {"varswap", gbm_cfg},  {"witness", calls_cfg}};
    for (auto const& [sub, cfg] : runs) {
        fs::path const out = root_ / sub;
        EXPECT_EQ(invoke({sub, "--config", cfg.string(), "--out", out.string()}), 0)
            << sub << ": " << err_.str();
        EXPECT_TRUE(fs::exists(out / "report.json")) << sub;
        EXPECT_TRUE(fs::exists(out / "manifest.json")) << sub;
    }
    EXPECT_TRUE(fs::exists(root_ / "witness" / "witness.csv"));
    EXPECT_TRUE(fs::exists(root_ / "varswap" / "varswap_paths.csv"));
    EXPECT_TRUE(fs::exists(root_ / "price" / "prices.csv"));
}

}  // namespace
}  // namespace complab
