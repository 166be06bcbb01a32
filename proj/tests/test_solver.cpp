#include <cmath>

#include <gtest/gtest.h>

#include "fwlab/envelope.hpp"
#include "fwlab/initial_data.hpp"
#include "fwlab/solver.hpp"

using namespace fwlab;

namespace {

Field reflect(const Field& f) {
    const std::size_t n = f.size();
    std::vector<double> v(n);
    for (std::size_t j = 0; j < n; ++j) v[j] = f[(n - j) % n];
    return Field(f.grid(), std::move(v));
}

double odd_defect(const Field& f) {
    const Field r = reflect(f);
    double worst = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) worst = std::max(worst, std::abs(f[j] + r[j]));
    return worst / std::max(1e-300, f.max_abs());
}

PeakonPairParams small_pair() { return {1.0, 0.5, Regime{1.0, 2.0, 2.0}, 0.5}; }

}  // namespace

TEST(Solver, ParsesSchemeNames) {
    EXPECT_EQ(parse_flux("llf"), Flux::local_lax_friedrichs);
    EXPECT_EQ(parse_flux("local-lax-friedrichs"), Flux::local_lax_friedrichs);
    EXPECT_EQ(parse_flux("rusanov"), Flux::rusanov);
    EXPECT_THROW(parse_flux("roe"), ConfigError);
    EXPECT_EQ(parse_reconstruction("weno5-z"), Reconstruction::weno5_z);
    EXPECT_EQ(parse_reconstruction("muscl-mc"), Reconstruction::muscl_mc);
    EXPECT_THROW(parse_reconstruction("weno3"), ConfigError);
    EXPECT_EQ(to_string(parse_flux(to_string(Flux::rusanov))), "rusanov");
}

TEST(Solver, StableStepFollowsCflBound) {
    const Grid g(40.0, 1024);
    const Field u = map(Field::zeros(g), [](double) { return -2.0; });
    EXPECT_NEAR(stable_dt(u, 0.3), 0.3 * g.spacing() / 3.0, 1e-15);
}

TEST(Solver, OversizedStepIsRejected) {
    const Grid g(40.0, 1024);
    const NonlocalEngine e(g);
    const Field u = sample_u0(small_pair(), g);
    const double dt = stable_dt(u, 0.3);
    EXPECT_NO_THROW(step(e, u, dt));
    EXPECT_THROW(step(e, u, 1.5 * dt), NumericalError);
    EXPECT_THROW(step(e, u, 0.0), NumericalError);
}

TEST(Solver, ConfigValidation) {
    SolverConfig c;
    c.cfl = 0.7;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.end_time = 0.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.snapshot_stride = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    EXPECT_DOUBLE_EQ(SolverConfig::for_pair(small_pair()).blowup_threshold, 50.0);
}

// The transport part preserves oddness; the source maps odd data to even data, so only the mean
// survives once it is switched on.
TEST(Solver, OddDataHasZeroMeanAndTransportKeepsItOdd) {
    const Grid g(40.0, 2048);
    const NonlocalEngine e(g);
    const Field u0 = sample_u0(small_pair(), g);
    EXPECT_LT(odd_defect(u0), 1e-15);
    for (bool source : {false, true}) {
        SolverConfig c;
        c.end_time = 0.3;
        c.include_source = source;
        const auto tr = evolve(e, u0, c);
        if (!source) EXPECT_LT(odd_defect(tr.snapshots.back()), 1e-10);
        for (const auto& d : tr.diagnostics) EXPECT_NEAR(d.E1, 0.0, 1e-12);
    }
}

TEST(Solver, MassIsConservedForNonSymmetricData) {
    const Grid g(40.0, 2048);
    const NonlocalEngine e(g);
    const Field u0 = sample_peakon(g, 0.0);
    SolverConfig c;
    c.end_time = 0.5;
    const auto tr = evolve(e, u0, c);
    const double e1 = tr.diagnostics.front().E1;
    EXPECT_NEAR(e1, -16.0 / 9.0 * 2.0 * (1.0 - std::exp(-20.0)), 1e-3);
    for (const auto& d : tr.diagnostics) EXPECT_NEAR(d.E1, e1, 1e-12 * std::abs(e1));
}

TEST(Solver, ShortPeakonRunTracksExactWave) {
    const Grid g(40.0, 4096);
    for (auto flux : {Flux::local_lax_friedrichs, Flux::rusanov}) {
        const NonlocalEngine e(g);
        SolverConfig c;
        c.end_time = 1.0;
        c.flux = flux;
        const auto tr = evolve(e, sample_peakon(g, 0.0), c);
        EXPECT_FALSE(tr.breakdown.has_value());
        EXPECT_LT(relative_l2(tr.snapshots.back(), sample_peakon(g, 1.0)), 0.02) << to_string(flux);
        const auto& d0 = tr.diagnostics.front();
        const auto& d1 = tr.diagnostics.back();
        EXPECT_LT(std::abs(d1.E2 / d0.E2 - 1.0), 0.01) << to_string(flux);
    }
}

TEST(Solver, MusclReconstructionRuns) {
    const Grid g(40.0, 2048);
    const NonlocalEngine e(g);
    SolverConfig c;
    c.end_time = 0.5;
    c.reconstruction = Reconstruction::muscl_mc;
    const auto tr = evolve(e, sample_peakon(g, 0.0), c);
    EXPECT_LT(relative_l2(tr.snapshots.back(), sample_peakon(g, 0.5)), 0.05);
}

TEST(Solver, OutputTimesAreHitExactly) {
    const Grid g(40.0, 1024);
    const NonlocalEngine e(g);
    SolverConfig c;
    c.end_time = 0.3;
    c.snapshot_stride = 1000000;
    c.output_times = {0.25, 0.1, 0.7, -1.0};
    const auto tr = evolve(e, sample_peakon(g, 0.0), c);
    ASSERT_EQ(tr.times.size(), 4u);
    EXPECT_EQ(tr.times[0], 0.0);
    EXPECT_EQ(tr.times[1], 0.1);
    EXPECT_EQ(tr.times[2], 0.25);
    EXPECT_EQ(tr.times[3], 0.3);
    EXPECT_EQ(tr.snapshots.size(), tr.times.size());
    EXPECT_EQ(tr.derivative_snapshots.size(), tr.times.size());
    EXPECT_EQ(tr.diagnostics.size(), tr.steps + 1);
    EXPECT_EQ(tr.find_time(0.25), 2u);
    EXPECT_FALSE(tr.find_time(0.2).has_value());
}

TEST(Solver, BreakdownPicksTheSteeperChannel) {
    const StepDiagnostics d{0.5, 0.0, 1.0, 0.0, 1.0, -5.0, 1.0};
    auto b = detect_breakdown(d, -10.0, 8.0, 7);
    ASSERT_TRUE(b.has_value());
    EXPECT_EQ(b->channel, "characteristic");
    EXPECT_EQ(b->slope, -10.0);
    EXPECT_EQ(b->step, 7u);

    const StepDiagnostics steep{0.5, 0.0, 1.0, 0.0, 1.0, -9.0, 1.0};
    b = detect_breakdown(steep, -1.0, 8.0, 3);
    ASSERT_TRUE(b.has_value());
    EXPECT_EQ(b->channel, "grid");
    EXPECT_EQ(b->time, 0.5);

    EXPECT_FALSE(detect_breakdown(d, -7.0, 8.0, 1).has_value());
}

TEST(Solver, PairBreaksDownInsideLifespanBracket) {
    const PeakonPairParams a{10.0, 0.1, Regime{1.0, 2.0, 2.0}, 0.5};
    const Grid g(40.0, 16384);
    const NonlocalEngine e(g);
    SolverConfig c = SolverConfig::for_pair(a);
    c.blowup_threshold = 20.0 * a.p0;
    c.end_time = 1.0;
    const auto tr = evolve(e, sample_u0(a, g), c);
    ASSERT_TRUE(tr.breakdown.has_value());
    EXPECT_EQ(tr.breakdown->channel, "grid");
    const auto life = lifespan_bracket(a);
    EXPECT_GT(tr.breakdown->time, 0.9 * life.t_min);
    EXPECT_LT(tr.breakdown->time, 1.1 * life.t_max);
}

// For odd u0 the transport term is odd and the source is even, so the even part of the first-step
// increment reproduces the source.
TEST(Solver, SourceGeneratesTheEvenPart) {
    const Grid g(40.0, 2048);
    const NonlocalEngine e(g);
    const Field u0 = sample_u0(small_pair(), g);
    const double dt = 1e-4;
    const Field rate = (1.0 / dt) * (step(e, u0, dt) - u0);
    const Field even = 0.5 * (rate + reflect(rate));
    EXPECT_LT(relative_l2(even, e.source_term(u0)), 1e-3);
}
