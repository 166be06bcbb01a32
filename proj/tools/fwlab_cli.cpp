#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fwlab/fwlab.hpp"

namespace {

enum Exit { ok = 0, verdict_fail = 1, usage_error = 2, numerical_failure = 3 };

struct Options {
    std::string config;
    std::string out;
    std::size_t parallel = 0;
    std::size_t resolution = 0;
};

std::string fmt(double v) { return fwlab::format_double(v); }

std::string out_dir(const Options& o, const fwlab::ExperimentConfig& cfg, const char* command) {
    if (!o.out.empty()) return o.out;
    return (std::filesystem::path(cfg.experiment.output_dir) / command).string();
}

int cmd_peakon(const Options& o, fwlab::ExperimentConfig cfg) {
    if (o.resolution) cfg.peakon.N = o.resolution;
    fwlab::Grid(cfg.peakon.L, cfg.peakon.N);
    const auto dir = out_dir(o, cfg, "peakon-check");
    const auto r = fwlab::run_peakon_check(cfg, dir);
    std::printf("peakon L=%s N=%zu horizon=%s steps=%zu\n", fmt(r.L).c_str(), r.N, fmt(r.horizon).c_str(), r.steps);
    std::printf("  relative L2 shape error  %.4e (limit %s)\n", r.shape_error, fmt(cfg.peakon.tolerance).c_str());
    if (r.horizon > 0.0)
        std::printf("  crest speed              %.6f (exact %.6f, rel. error %.3e)\n", r.crest_speed,
                    fwlab::peakon_speed, r.crest_speed_error);
    std::printf("  verdict                  %s\n  output                   %s\n", r.pass ? "PASS" : "FAIL", dir.c_str());
    return r.pass ? ok : verdict_fail;
}

int cmd_run(const Options& o, fwlab::ExperimentConfig cfg) {
    if (o.resolution) cfg.grid.N = o.resolution;
    cfg.validate();
    const auto dir = out_dir(o, cfg, "run");
    const auto r = fwlab::run_pair(cfg, cfg.pair, dir, cfg.experiment.inflation_constant);
    std::printf("run p0=%s q0=%s N=%zu steps=%zu\n", fmt(r.p0).c_str(), fmt(r.q0).c_str(), r.N, r.steps);
    std::printf("  lifespan bracket         T_min=%.6g T_max=%.6g\n", r.t_min, r.t_max);
    if (std::isnan(r.breakdown_time))
        std::printf("  breakdown                none up to t=%.6g\n", r.end_time);
    else
        std::printf("  breakdown                t=%.6g (%.4f T_min, %s channel, slope %.4g)\n", r.breakdown_time,
                    r.breakdown_time / r.t_min, r.breakdown_channel.c_str(), r.breakdown_slope);
    std::printf("  conservation             E1 drift %.3e, E2 relative drift %.3e\n", r.e1_drift, r.e2_drift);
    std::printf("  sandwich pass rate       %.4f (grid channel %.4f)\n", r.sandwich_rate, r.sandwich_rate_grid);
    std::printf("  exterior pass rate       %.4f (grid channel %.4f)\n", r.exterior_rate, r.exterior_rate_grid);
    std::printf("  energy bound             %s (min A/lower %.4f, Lagrangian %.4f)\n", r.energy_pass ? "holds" : "violated",
                r.energy_ratio, r.energy_ratio_lagrangian);
    if (r.terminal_reached)
        std::printf("  terminal T0=%.6g          window L^p %.5g, W^{1,p} %.5g, threshold %s\n", r.t0,
                    r.certificate.window_lagrangian, r.certificate.w1p_composite,
                    std::isnan(r.certificate.threshold) ? "uncalibrated" : fmt(r.certificate.threshold).c_str());
    std::printf("  verdict                  %s\n  output                   %s\n", r.pass ? "PASS" : "FAIL", dir.c_str());
    return r.pass ? ok : verdict_fail;
}

int cmd_sweep(const Options& o, fwlab::ExperimentConfig cfg) {
    if (o.resolution) cfg.grid.N = o.resolution;
    if (o.parallel) cfg.experiment.parallelism = o.parallel;
    cfg.validate();
    const auto dir = out_dir(o, cfg, "sweep");
    const auto r = fwlab::run_sweep(cfg, dir);
    std::printf("sweep rows=%zu inflation constant c=%.5g (%s)\n", r.rows.size(), r.inflation_constant,
                r.constant_source.c_str());
    std::printf("  %-4s %-8s %-10s %-8s %-11s %-11s %-11s %-9s %s\n", "row", "p0", "q0", "N", "initial", "window",
                "W1p", "cert", "status");
    for (const auto& row : r.rows)
        std::printf("  %-4zu %-8.4g %-10.4g %-8zu %-11.5g %-11.5g %-11.5g %-9s %s\n", row.index, row.p0, row.q0, row.N,
                    row.initial_besov, row.certificate.window_lagrangian, row.certificate.w1p_composite,
                    row.certificate.pass ? "pass" : "fail", row.status.c_str());
    std::printf("  initial norms strictly decreasing   %s\n", r.initial_decreasing ? "yes" : "no");
    std::printf("  terminal W^{1,p} strictly increasing %s\n", r.terminal_increasing ? "yes" : "no");
    std::printf("  window growth exponent in p0        %.4f\n", r.window_growth_exponent);
    std::printf("  verdict                              %s\n  output                               %s\n",
                r.pass ? "PASS" : "FAIL", dir.c_str());
    if (r.numerical_failure) return numerical_failure;
    return r.pass ? ok : verdict_fail;
}

int cmd_norms(const Options& o, fwlab::ExperimentConfig cfg) {
    if (o.resolution) cfg.norms.N = o.resolution;
    const auto dir = out_dir(o, cfg, "norms");
    const auto r = fwlab::run_norms(cfg, dir);
    std::printf("norm scaling in q0 (p0=%s, N=%zu)\n", fmt(cfg.norms.p0).c_str(), cfg.norms.N);
    for (const auto& f : r.fits)
        std::printf("  sigma=%-5s target %.4f  exact %.4f  Littlewood-Paley %.4f (%+.2f%%)  %s\n",
                    fmt(f.sigma).c_str(), f.target, f.slope_exact, f.slope_measured,
                    100.0 * (f.slope_measured / f.target - 1.0), f.pass ? "PASS" : "FAIL");
    std::printf("  verdict %s\n  output  %s\n", r.pass ? "PASS" : "FAIL", dir.c_str());
    return r.pass ? ok : verdict_fail;
}

int cmd_envelope(const Options& o, const fwlab::ExperimentConfig& cfg) {
    const auto dir = out_dir(o, cfg, "envelope");
    const auto r = fwlab::run_envelope(cfg, dir);
    std::printf("closed-form envelope p0=%s q0=%s\n", fmt(cfg.pair.p0).c_str(), fmt(cfg.pair.q0).c_str());
    std::printf("  T_min %.7g  T_max %.7g  (1/(3p0), 2/(3p0)) = (%.7g, %.7g)\n", r.lifespan.t_min, r.lifespan.t_max,
                1.0 / (3.0 * cfg.pair.p0), 2.0 / (3.0 * cfg.pair.p0));
    std::printf("  A0 %.6g  M(T_min)/M(0) %.5g  lower bound at T_min %.6g\n", r.a0, r.asymptotics.m_ratio,
                r.asymptotics.lower_at_t_min);
    std::printf("  verdict %s\n  output  %s\n", r.pass ? "PASS" : "FAIL", dir.c_str());
    return r.pass ? ok : verdict_fail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Peakon-pair wave breaking and norm inflation experiments"};
    app.set_version_flag("--version", fwlab::tool_version);
    app.require_subcommand(1);
    Options o;
    app.add_option("--config", o.config, "Configuration file (key = value with [sections])")->check(CLI::ExistingFile);
    app.add_option("--out", o.out, "Output directory");
    app.add_option("--parallel", o.parallel, "Concurrent runs in a sweep")->check(CLI::PositiveNumber);
    app.add_option("--resolution", o.resolution, "Grid size N (power of two)")->check(CLI::PositiveNumber);

    auto* peakon = app.add_subcommand("peakon-check", "Evolve the travelling peakon and compare with the exact wave");
    auto* run = app.add_subcommand("run", "Single peakon-pair run with envelope, energy and norm analysis");
    auto* sweep = app.add_subcommand("sweep", "Norm-inflation sweep over the configured schedule");
    auto* norms = app.add_subcommand("norms", "Sobolev norm scaling of the initial datum in q0");
    auto* envelope = app.add_subcommand("envelope", "Closed-form lifespan bracket and envelope table");
    for (auto* sub : {peakon, run, sweep, norms, envelope}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return usage_error;
    }

    try {
        const fwlab::ExperimentConfig cfg =
            o.config.empty() ? fwlab::ExperimentConfig{} : fwlab::load_experiment_config(o.config);
        if (*peakon) return cmd_peakon(o, cfg);
        if (*run) return cmd_run(o, cfg);
        if (*sweep) return cmd_sweep(o, cfg);
        if (*norms) return cmd_norms(o, cfg);
        return cmd_envelope(o, cfg);
    } catch (const fwlab::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return usage_error;
    } catch (const fwlab::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return numerical_failure;
    }
}
