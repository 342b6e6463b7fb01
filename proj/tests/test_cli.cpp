#include "cli.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

namespace fs = std::filesystem;
using fluxshape::cli::run;

namespace {

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fs::temp_directory_path() /
              ("fluxshape_cli_" + std::to_string(::getpid()) + "_" +
               ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }

    int call(std::vector<std::string> args) {
        args.insert(args.begin(), "fluxshape");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        out.str("");
        err.str("");
        return run(static_cast<int>(argv.size()), argv.data(), out, err);
    }

    nlohmann::json read_json(const fs::path& p) {
        std::ifstream in(p);
        return nlohmann::json::parse(in);
    }

    fs::path dir;
    std::ostringstream out, err;
};

} // namespace

TEST_F(CliTest, DesignWritesPulseAndManifest) {
    const auto o = (dir / "d").string();
    ASSERT_EQ(call({"design", "--family", "biharmonic", "--b1", "1", "--tau-pulse-us", "8", "--tau-assumed-us", "11.2", "--out-dir", o}), 0);
    const auto pulse = read_json(fs::path(o) / "pulse.json");
    EXPECT_LT(std::abs(pulse["diagnostics"]["k_exp_at_assumed"].get<double>()), 1e-12);
    const auto manifest = read_json(fs::path(o) / "manifest.json");
    EXPECT_EQ(manifest["command"], "design");
}

TEST_F(CliTest, ValidationErrorWritesNothing) {
    const auto o = (dir / "bad").string();
    EXPECT_EQ(call({"design", "--family", "biharmonic", "--b1", "1", "--tau-pulse-us", "8", "--tau-assumed-us", "-3", "--out-dir", o}), 2);
    EXPECT_FALSE(fs::exists(fs::path(o) / "manifest.json"));
    EXPECT_FALSE(fs::exists(fs::path(o) / "pulse.json"));
}

TEST_F(CliTest, UnknownOptionIsValidation) {
    EXPECT_EQ(call({"kexp", "--no-such-flag"}), 2);
    EXPECT_EQ(call({"nonsense"}), 2);
}

TEST_F(CliTest, KexpPrintsValue) {
    const auto o = (dir / "d").string();
    ASSERT_EQ(call({"design", "--family", "single-sine", "--b1", "1", "--tau-pulse-us", "8", "--out-dir", o}), 0);
    const auto k = (dir / "k").string();
    ASSERT_EQ(call({"kexp", "--pulse", o + "/pulse.json", "--tau-us", "11.19", "--out-dir", k}), 0);
    const double x = 2.0 * 3.141592653589793 / 8e-6 * 11.19e-6;
    EXPECT_NEAR(std::stod(out.str()), -x / (1 + x * x), 1e-9);
    EXPECT_TRUE(fs::exists(fs::path(k) / "kexp.json"));
}

TEST_F(CliTest, UnconvergedExtractExitsThree) {
    const auto csv = dir / "flat.csv";
    {
        std::ofstream f(csv);
        f << "tau_delay_s,x_expect,y_expect\n";
        for (int k = 0; k < 50; ++k) f << k * 1e-7 << ",1,0\n";
    }
    const auto o = (dir / "e").string();
    EXPECT_EQ(call({"extract", "--trace", csv.string(), "--tau-pulse-us", "5", "--fit-window-us", "5", "--out-dir", o}),
              3);
    EXPECT_FALSE(fs::exists(fs::path(o) / "manifest.json"));
    EXPECT_TRUE(fs::exists(fs::path(o) / "report.json") || fs::exists(fs::path(o) / "diagnostics.json"));
}
