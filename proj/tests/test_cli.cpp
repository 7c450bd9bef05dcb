#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

#include "glmb/density_io.hpp"
#include "glmb/oracle/generators.hpp"

namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
    static const fs::path dir = [] {
        const fs::path d =
            fs::temp_directory_path() / ("glmbctl_test_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(GLMBCTL_PATH) + " " + args + " > " +
                            (work_dir() / "stdout.txt").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

const char* kTinyOverrides =
    " --override duration=240 --override monte_carlo_runs=2"
    " --override sensor.start_time=80 --override control.samples=2"
    " --override control.horizon=2 --override control.grid_deg=60"
    " --override sensor.clutter_rate=5 --override filter.max_components=30"
    " --override filter.max_hypotheses=10 --override control.rollout_max_components=6";

std::string scenario1() { return std::string(SCENARIO_DIR) + "/scenario1.cfg"; }

}  // namespace

TEST(Cli, ValidateShippedScenarios) {
    EXPECT_EQ(run_cli("validate " + scenario1()), 0);
    EXPECT_EQ(run_cli("validate " + std::string(SCENARIO_DIR) + "/scenario2.cfg"), 0);
}

TEST(Cli, ValidateRejectsBadOverride) {
    EXPECT_EQ(run_cli("validate " + scenario1() + " --override controller=warp"), 1);
    EXPECT_EQ(run_cli("validate " + scenario1() + " --override sensor.eta=banana"), 1);
    EXPECT_EQ(run_cli("validate /nonexistent.cfg"), 1);
}

TEST(Cli, RunIsByteDeterministicAcrossRunsAndJobs) {
    const fs::path out_a = work_dir() / "run_a";
    const fs::path out_b = work_dir() / "run_b";
    const fs::path out_c = work_dir() / "run_c";
    const std::string base = "run " + scenario1() + kTinyOverrides + " --seed 7 --out ";
    ASSERT_EQ(run_cli(base + out_a.string() + " --jobs 1"), 0);
    ASSERT_EQ(run_cli(base + out_b.string() + " --jobs 1"), 0);
    ASSERT_EQ(run_cli(base + out_c.string() + " --jobs 4"), 0);

    for (const char* file : {"ospa.csv", "control_log.csv", "heatmap.csv", "resolved.cfg"}) {
        const std::string a = slurp(out_a / file);
        EXPECT_FALSE(a.empty()) << file;
        EXPECT_EQ(a, slurp(out_b / file)) << file << " differs across identical runs";
        EXPECT_EQ(a, slurp(out_c / file)) << file << " differs across job counts";
    }
    EXPECT_TRUE(fs::exists(out_a / "plot_results.py"));
    EXPECT_TRUE(fs::exists(out_a / "summary.txt"));
}

TEST(Cli, RunDoesNotMutateScenarioFile) {
    const std::string before = slurp(scenario1());
    const fs::path out = work_dir() / "run_mut";
    ASSERT_EQ(run_cli("run " + scenario1() + kTinyOverrides + " --seed 3 --out " +
                      out.string()),
              0);
    EXPECT_EQ(before, slurp(scenario1()));
}

TEST(Cli, OracleSuitesPass) {
    EXPECT_EQ(run_cli("oracle truncation --cases 10 --seed 3"), 0);
    EXPECT_EQ(run_cli("oracle cs-divergence --cases 5 --seed 3"), 0);
    EXPECT_EQ(run_cli("oracle nonsense"), 1);
}

TEST(Cli, InspectDensityFile) {
    glmb::oracle::DensityGeneratorOptions opt;
    opt.state_dim = 2;
    glmb::RandomStream rng(9);
    const glmb::GlmbDensity d = glmb::oracle::random_density(opt, rng);
    const fs::path path = work_dir() / "density.glmbd";
    glmb::save_density(path.string(), d);
    EXPECT_EQ(run_cli("inspect " + path.string() + " --void disc:0,0,1 --void box:-1,-1,1,1"),
              0);
    EXPECT_EQ(run_cli("inspect " + path.string() + " --csd " + path.string()), 0);
    EXPECT_EQ(run_cli("inspect /nonexistent.glmbd"), 1);
}
