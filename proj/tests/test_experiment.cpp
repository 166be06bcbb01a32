#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "fwlab/experiment.hpp"

using namespace fwlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    fs::path p = fs::temp_directory_path() / "fwlab-tests" / (std::string(info->name()) + "-" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// A pair coarse enough to run in well under a second.
ExperimentConfig small_config() {
    ExperimentConfig c;
    c.pair = {1.0, 0.3, Regime{1.0, 2.0, 2.0}, 0.5};
    c.grid.N = 4096;
    c.seeds.interior = 16;
    c.seeds.exterior = 4;
    c.norms.N = 4096;
    c.norms.q0s = {0.2, 0.4};
    return c;
}

}  // namespace

TEST(Experiment, ResolutionRule) {
    GridSettings g;
    EXPECT_EQ(g.resolution_for(0.5), std::size_t{1} << 14);
    EXPECT_EQ(g.resolution_for(0.01), std::size_t{1} << 18);
    EXPECT_EQ(g.resolution_for(1e-4), std::size_t{1} << 20);
    g.N = 2048;
    EXPECT_EQ(g.resolution_for(1e-4), 2048u);
}

TEST(Experiment, PlanPlacesTerminalTimeAndMarks) {
    ExperimentConfig c = small_config();
    const auto plan = plan_pair(c, c.pair);
    EXPECT_DOUBLE_EQ(plan.t0, plan.lifespan.t_min * (1.0 - 0.3));
    EXPECT_DOUBLE_EQ(plan.end_time, 1.2 * plan.lifespan.t_max);
    EXPECT_GE(plan.threshold, 50.0);
    EXPECT_TRUE(std::is_sorted(plan.marks.begin(), plan.marks.end()));
    EXPECT_NE(std::find(plan.marks.begin(), plan.marks.end(), plan.t0), plan.marks.end());
    EXPECT_EQ(plan.grid.size(), 4096u);

    c.experiment.terminal_fraction = 0.9;
    EXPECT_DOUBLE_EQ(terminal_time(c, c.pair), 0.9 * plan.lifespan.t_min);
    c.experiment.terminal_fraction = unset;
    c.experiment.terminal_gap = 10.0;
    EXPECT_THROW(terminal_time(c, c.pair), ConfigError);
}

TEST(Experiment, EnvelopeCommandMatchesClosedForms) {
    const auto dir = scratch("env");
    const ExperimentConfig c;
    const auto r = run_envelope(c, dir.string());
    EXPECT_NEAR(r.lifespan.t_min, 0.0334974932708093, 1e-15);
    EXPECT_NEAR(r.lifespan.t_max, 0.0338375350516170, 1e-15);
    EXPECT_NEAR(r.a0, 7.84185077799470, 1e-10);
    EXPECT_TRUE(r.pass);
    for (const char* f : {"meta.json", "envelope.csv", "report.json"}) EXPECT_TRUE(fs::exists(dir / f)) << f;
    const auto meta = Json::parse(slurp(dir / "meta.json"));
    EXPECT_EQ(meta["version"], tool_version);
    EXPECT_EQ(meta["command"], "envelope");
    EXPECT_EQ(meta["config"]["params"]["p0"], 10.0);
}

TEST(Experiment, NormsCommandFitsSlopes) {
    ExperimentConfig c = small_config();
    c.norms.sigmas = {1.0};
    const auto r = run_norms(c, scratch("norms").string());
    ASSERT_EQ(r.fits.size(), 1u);
    const double exact = std::log(hs_norm_exact(1.0, 0.4, 1.0) / hs_norm_exact(1.0, 0.2, 1.0)) / std::log(2.0);
    EXPECT_NEAR(r.fits[0].slope_exact, exact, 1e-12);
    EXPECT_NEAR(r.fits[0].slope_symbol, exact, 0.05 * exact);
    EXPECT_TRUE(r.fits[0].bracket_holds);
    EXPECT_EQ(r.rows.size(), 3u * 2u + 2u);
}

TEST(Experiment, PeakonCheckAtZeroHorizonIsExact) {
    ExperimentConfig c;
    c.peakon.N = 1024;
    c.peakon.horizon = 0.0;
    const auto r = run_peakon_check(c, "");
    EXPECT_EQ(r.shape_error, 0.0);
    EXPECT_EQ(r.steps, 0u);
    EXPECT_TRUE(r.pass);
}

TEST(Experiment, ShortPeakonCheck) {
    ExperimentConfig c;
    c.peakon.N = 4096;
    c.peakon.horizon = 1.0;
    const auto dir = scratch("peakon");
    const auto r = run_peakon_check(c, dir.string());
    EXPECT_TRUE(r.pass) << r.shape_error << " " << r.crest_speed_error;
    EXPECT_LT(r.crest_speed_error, 0.01);
    EXPECT_TRUE(fs::exists(dir / "peakon.csv"));
    EXPECT_TRUE(fs::exists(dir / "profile.csv"));
}

TEST(Experiment, RunPairWritesArtifactsReproducibly) {
    const ExperimentConfig c = small_config();
    const auto d1 = scratch("a"), d2 = scratch("b");
    const auto r1 = run_pair(c, c.pair, d1.string());
    const auto r2 = run_pair(c, c.pair, d2.string());

    EXPECT_TRUE(r1.breakdown_ok) << r1.breakdown_time << " in [" << r1.t_min << ", " << r1.t_max << "]";
    EXPECT_TRUE(r1.terminal_reached);
    EXPECT_LT(r1.e1_drift, 1e-12);
    EXPECT_NEAR(r1.initial_hs_exact, hs_norm_exact(1.0, 0.3, 1.05), 1e-14);
    EXPECT_TRUE(std::isnan(r1.certificate.threshold));
    EXPECT_FALSE(r1.energy.empty());
    EXPECT_EQ(r1.energy.front().t, 0.0);

    for (const char* f : {"meta.json", "diagnostics.csv", "characteristics.csv", "envelope.csv", "verdicts.csv",
                          "norms.csv", "report.json", "snapshots/index.csv"}) {
        ASSERT_TRUE(fs::exists(d1 / f)) << f;
        if (std::string(f).ends_with(".csv")) EXPECT_EQ(slurp(d1 / f), slurp(d2 / f)) << f;
    }
    auto j1 = Json::parse(slurp(d1 / "report.json"));
    auto j2 = Json::parse(slurp(d2 / "report.json"));
    j1.erase("directory");
    j2.erase("directory");
    EXPECT_EQ(j1, j2);
    EXPECT_EQ(r1.steps, r2.steps);
}

TEST(Experiment, TinyAmplitudeDoesNotBreakWithinUnitTime) {
    ExperimentConfig c = small_config();
    c.solver.end_time = 1.0;
    const auto r = run_pair(c, c.params(0.1, 0.3), "");
    EXPECT_TRUE(std::isnan(r.breakdown_time));
    EXPECT_LT(r.end_time, 1.1 * r.t_max);
    EXPECT_TRUE(r.breakdown_ok);
}

TEST(Experiment, EmptyScheduleGivesPassingEmptySweep) {
    ExperimentConfig c = small_config();
    c.pairs = std::vector<SchedulePair>{};
    const auto dir = scratch("sweep");
    const auto r = run_sweep(c, dir.string());
    EXPECT_TRUE(r.rows.empty());
    EXPECT_TRUE(r.pass);
    EXPECT_FALSE(r.numerical_failure);
    EXPECT_TRUE(fs::exists(dir / "inflation.csv"));
    EXPECT_TRUE(fs::exists(dir / "meta.json"));
}

TEST(Experiment, SingleRowSweepMatchesDirectRun) {
    ExperimentConfig c = small_config();
    c.pairs = std::vector<SchedulePair>{{1.0, 0.3}};
    c.experiment.inflation_constant = 0.1;
    const auto sweep = run_sweep(c, scratch("sweep").string());
    const auto direct = run_pair(c, c.pair, "", 0.1);
    ASSERT_EQ(sweep.rows.size(), 1u);
    const auto& row = sweep.rows[0];
    EXPECT_EQ(row.status, "ok");
    EXPECT_EQ(row.steps, direct.steps);
    EXPECT_EQ(row.initial_besov, direct.initial_besov);
    EXPECT_EQ(row.certificate.window_lagrangian, direct.certificate.window_lagrangian);
    EXPECT_EQ(row.certificate.w1p_composite, direct.certificate.w1p_composite);
    EXPECT_EQ(row.breakdown_time, direct.breakdown_time);
    EXPECT_EQ(sweep.constant_source, "config");
}

TEST(Experiment, SweepCalibratesConstantAtReference) {
    ExperimentConfig c = small_config();
    c.pairs = std::vector<SchedulePair>{{2.0, 0.2}};
    c.experiment.reference_p0 = 1.0;
    c.experiment.reference_q0 = 0.3;
    const auto dir = scratch("sweep");
    const auto r = run_sweep(c, dir.string());
    const auto ref = run_pair(c, c.pair, "");
    EXPECT_DOUBLE_EQ(r.inflation_constant, inflation_constant_from(ref));
    EXPECT_TRUE(fs::exists(dir / "reference" / "report.json"));
    EXPECT_TRUE(fs::exists(dir / "row-00" / "report.json"));
}

TEST(Experiment, FailedRowIsRecordedNotThrown) {
    ExperimentConfig c = small_config();
    c.pairs = std::vector<SchedulePair>{{1.0, 0.3}, {1.0, 2.0}};
    c.experiment.inflation_constant = 0.1;
    c.experiment.parallelism = 2;
    const auto r = run_sweep(c, "");
    ASSERT_EQ(r.rows.size(), 2u);
    EXPECT_EQ(r.rows[0].status, "ok");
    EXPECT_EQ(r.rows[1].status, "error");
    EXPECT_FALSE(r.rows[1].error.empty());
    EXPECT_FALSE(r.all_completed);
    EXPECT_FALSE(r.pass);
}

TEST(Experiment, SlopeFit) {
    EXPECT_DOUBLE_EQ(least_squares_slope({0, 1, 2}, {1, 3, 5}), 2.0);
    EXPECT_THROW(least_squares_slope({1}, {1}), ConfigError);
}
