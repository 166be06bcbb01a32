#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "fwlab/besov.hpp"
#include "fwlab/characteristics.hpp"
#include "fwlab/config.hpp"
#include "fwlab/envelope.hpp"
#include "fwlab/initial_data.hpp"
#include "fwlab/nonlocal.hpp"
#include "fwlab/report.hpp"
#include "fwlab/solver.hpp"

namespace fwlab {

inline constexpr double unset = std::numeric_limits<double>::quiet_NaN();

struct SchedulePair {
    double p0;
    double q0;
};

// p0 = p0_base 2^k, q0 = q0_base 2^{-a k} for k = k_min..k_max.
struct ScheduleRule {
    double p0_base = 10.0;
    double q0_base = 0.5;
    double a = 2.5;
    long k_min = 1;
    long k_max = 4;
};

struct GridSettings {
    double L = 40.0;
    std::size_t N = 0;  // 0 selects the q0-coupled rule
    std::size_t n_floor = std::size_t{1} << 14;
    std::size_t n_cap = std::size_t{1} << 20;
    double points_across = 64.0;

    // Smallest power of two with at least `points_across` cells over (-q0, q0), clamped to [floor, cap].
    std::size_t resolution_for(double q0) const {
        if (N != 0) return N;
        const double want = points_across * L / q0;
        std::size_t n = std::size_t{1} << static_cast<int>(std::ceil(std::log2(want)));
        return std::clamp(n, n_floor, n_cap);
    }
};

struct SolverSettings {
    double cfl = 0.3;
    Flux flux = Flux::local_lax_friedrichs;
    Reconstruction reconstruction = Reconstruction::weno5_z;
    NonlocalStrategy nonlocal = NonlocalStrategy::fourier_symbol;
    double end_time = unset;           // unset: 1.2 T_max
    double blowup_threshold = unset;   // unset: 50 p0
    std::size_t snapshot_stride = 1000000;
    bool raise_threshold = true;
};

struct EnvelopeSettings {
    SlopeChannel channel = SlopeChannel::characteristic;
    double sandwich_tolerance = 0.05;
    double sandwich_limit = 0.9;
    double sandwich_rate = 0.95;
    double exterior_slack = 0.10;
    double exterior_limit = 0.95;
    double energy_factor = 0.9;
    double energy_limit = 0.9;
};

struct ExperimentSettings {
    double terminal_gap = 1.0;         // T0 = T_min (1 - gap q0)
    double terminal_fraction = unset;  // when set, T0 = fraction T_min instead
    std::string output_dir = "fwlab-out";
    std::size_t parallelism = 1;
    double inflation_constant = unset;  // unset: calibrate at the reference pair
    double reference_p0 = 10.0;
    double reference_q0 = 0.01;
    std::string snapshots = "terminal";  // none | terminal | marks
};

struct PeakonSettings {
    double L = 40.0;
    std::size_t N = std::size_t{1} << 14;
    double horizon = 3.0;
    double tolerance = 0.02;
    double speed_tolerance = 0.01;
};

struct NormSettings {
    double p0 = 1.0;
    std::vector<double> q0s{0.02, 0.04, 0.08, 0.16};
    std::vector<double> sigmas{0.8, 1.0, 1.2};
    double L = 40.0;
    std::size_t N = std::size_t{1} << 16;
    double tolerance = 0.05;
};

struct ExperimentConfig {
    PeakonPairParams pair{10.0, 0.01, Regime{1.0, 2.0, 2.0}, 0.5};
    double sigma = 1.05;
    GridSettings grid;
    SolverSettings solver;
    SeedLayout seeds;
    EnvelopeSettings envelope;
    std::optional<std::vector<SchedulePair>> pairs;
    ScheduleRule rule;
    ExperimentSettings experiment;
    PeakonSettings peakon;
    NormSettings norms;

    PeakonPairParams params(double p0, double q0) const {
        PeakonPairParams a = pair;
        a.p0 = p0;
        a.q0 = q0;
        return a;
    }

    std::vector<SchedulePair> schedule() const {
        if (pairs) return *pairs;
        std::vector<SchedulePair> out;
        for (long k = rule.k_min; k <= rule.k_max; ++k)
            out.push_back({rule.p0_base * std::ldexp(1.0, static_cast<int>(k)),
                           rule.q0_base * std::pow(2.0, -rule.a * static_cast<double>(k))});
        return out;
    }

    void validate() const {
        pair.validate();
        if (!(sigma > 0.5 && sigma < 1.5)) throw ConfigError("params.sigma must lie in (1/2, 3/2)");
        if (!pairs) {
            if (rule.k_max < rule.k_min) throw ConfigError("schedule.k_max must be >= schedule.k_min");
            // Initial H^sigma norms scale like 2^{k (1 - a (3/2 - sigma))}; they shrink only when a > 1/(3/2 - sigma).
            const double need = 1.0 / (1.5 - sigma);
            if (!(rule.a > need))
                throw ConfigError("schedule.a = " + format_double(rule.a) + " must exceed 1/(3/2 - sigma) = " +
                                  format_double(need) + " for the initial norms to shrink");
        }
        for (const auto& e : schedule()) params(e.p0, e.q0).validate();
        if (!(grid.L > 0.0)) throw ConfigError("grid.L must be positive");
        if (grid.N != 0) Grid(grid.L, grid.N);
        SolverConfig probe;
        probe.cfl = solver.cfl;
        probe.snapshot_stride = solver.snapshot_stride;
        probe.validate();
        if (!std::isnan(solver.end_time) && !(solver.end_time > 0.0)) throw ConfigError("solver.end_time must be positive");
        if (!std::isnan(solver.blowup_threshold) && !(solver.blowup_threshold > 0.0))
            throw ConfigError("solver.blowup_threshold must be positive");
        if (!(experiment.terminal_gap >= 0.0)) throw ConfigError("experiment.terminal_gap must be >= 0");
        if (!std::isnan(experiment.terminal_fraction) &&
            !(experiment.terminal_fraction > 0.0 && experiment.terminal_fraction < 1.0))
            throw ConfigError("experiment.terminal_fraction must lie in (0, 1)");
        if (experiment.parallelism == 0) throw ConfigError("experiment.parallelism must be at least 1");
        const auto& snap = experiment.snapshots;
        if (snap != "none" && snap != "terminal" && snap != "marks")
            throw ConfigError("experiment.snapshots must be none, terminal or marks");
        if (!(peakon.horizon >= 0.0)) throw ConfigError("peakon.horizon must be >= 0");
        if (norms.q0s.size() < 2) throw ConfigError("norms.q0 needs at least two values");
        if (seeds.interior == 0) throw ConfigError("seeds.interior must be at least 1");
    }
};

namespace detail {

inline std::size_t size_or_auto(const ConfigFile& f, const std::string& key, std::size_t fallback) {
    if (!f.has(key)) return fallback;
    const std::string v = f.get_string(key, "");
    if (v == "auto") return 0;
    const long n = f.get_int(key, 0);
    if (n <= 0) throw ConfigError(key + " must be positive");
    return static_cast<std::size_t>(n);
}

inline double double_or_auto(const ConfigFile& f, const std::string& key, double fallback) {
    if (!f.has(key)) return fallback;
    const std::string v = f.get_string(key, "");
    return v == "auto" ? unset : ConfigFile::to_double(key, v);
}

inline std::vector<SchedulePair> parse_pairs(const std::string& key, const std::string& text) {
    std::vector<SchedulePair> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = std::min(text.find(',', start), text.size());
        std::string item = text.substr(start, end - start);
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (!item.empty()) {
            const auto colon = item.find(':');
            if (colon == std::string::npos) throw ConfigError(key + ": expected p0:q0 entries, got '" + item + "'");
            out.push_back({ConfigFile::to_double(key, item.substr(0, colon)),
                           ConfigFile::to_double(key, item.substr(colon + 1))});
        }
        start = end + 1;
    }
    return out;
}

}  // namespace detail

inline ExperimentConfig load_experiment_config(const ConfigFile& f) {
    ExperimentConfig c;
    c.pair.p0 = f.get_double("params.p0", c.pair.p0);
    c.pair.q0 = f.get_double("params.q0", c.pair.q0);
    c.pair.regime.s = f.get_double("params.s", c.pair.regime.s);
    c.pair.regime.p = f.get_double("params.p", c.pair.regime.p);
    c.pair.regime.r = f.get_double("params.r", c.pair.regime.r);
    c.pair.delta = f.get_double("params.delta", c.pair.delta);
    c.sigma = f.get_double("params.sigma", c.sigma);

    c.grid.L = f.get_double("grid.L", c.grid.L);
    c.grid.N = detail::size_or_auto(f, "grid.N", c.grid.N);
    c.grid.n_floor = detail::size_or_auto(f, "grid.n_floor", c.grid.n_floor);
    c.grid.n_cap = detail::size_or_auto(f, "grid.n_cap", c.grid.n_cap);
    c.grid.points_across = f.get_double("grid.points_across", c.grid.points_across);

    c.solver.cfl = f.get_double("solver.cfl", c.solver.cfl);
    if (f.has("solver.flux")) c.solver.flux = parse_flux(f.get_string("solver.flux", ""));
    if (f.has("solver.reconstruction"))
        c.solver.reconstruction = parse_reconstruction(f.get_string("solver.reconstruction", ""));
    if (f.has("solver.nonlocal")) c.solver.nonlocal = parse_nonlocal_strategy(f.get_string("solver.nonlocal", ""));
    c.solver.end_time = detail::double_or_auto(f, "solver.end_time", c.solver.end_time);
    c.solver.blowup_threshold = detail::double_or_auto(f, "solver.blowup_threshold", c.solver.blowup_threshold);
    c.solver.snapshot_stride = detail::size_or_auto(f, "solver.snapshot_stride", c.solver.snapshot_stride);
    c.solver.raise_threshold = f.get_bool("solver.raise_threshold", c.solver.raise_threshold);

    c.seeds.interior = static_cast<std::size_t>(f.get_int("seeds.interior", static_cast<long>(c.seeds.interior)));
    c.seeds.exterior = static_cast<std::size_t>(f.get_int("seeds.exterior", static_cast<long>(c.seeds.exterior)));
    c.seeds.exterior_extent = f.get_double("seeds.exterior_extent", c.seeds.exterior_extent);
    c.seeds.proxy_offset = f.get_double("seeds.proxy_offset", c.seeds.proxy_offset);

    if (f.has("envelope.channel")) {
        const auto ch = f.get_string("envelope.channel", "");
        if (ch == "characteristic") c.envelope.channel = SlopeChannel::characteristic;
        else if (ch == "grid") c.envelope.channel = SlopeChannel::grid;
        else throw ConfigError("envelope.channel must be characteristic or grid");
    }
    c.envelope.sandwich_tolerance = f.get_double("envelope.sandwich_tolerance", c.envelope.sandwich_tolerance);
    c.envelope.sandwich_limit = f.get_double("envelope.sandwich_limit", c.envelope.sandwich_limit);
    c.envelope.sandwich_rate = f.get_double("envelope.sandwich_rate", c.envelope.sandwich_rate);
    c.envelope.exterior_slack = f.get_double("envelope.exterior_slack", c.envelope.exterior_slack);
    c.envelope.exterior_limit = f.get_double("envelope.exterior_limit", c.envelope.exterior_limit);
    c.envelope.energy_factor = f.get_double("envelope.energy_factor", c.envelope.energy_factor);
    c.envelope.energy_limit = f.get_double("envelope.energy_limit", c.envelope.energy_limit);

    if (f.has("schedule.pairs")) c.pairs = detail::parse_pairs("schedule.pairs", f.get_string("schedule.pairs", ""));
    c.rule.p0_base = f.get_double("schedule.p0_base", c.rule.p0_base);
    c.rule.q0_base = f.get_double("schedule.q0_base", c.rule.q0_base);
    c.rule.a = f.get_double("schedule.a", c.rule.a);
    c.rule.k_min = f.get_int("schedule.k_min", c.rule.k_min);
    c.rule.k_max = f.get_int("schedule.k_max", c.rule.k_max);

    c.experiment.terminal_gap = f.get_double("experiment.terminal_gap", c.experiment.terminal_gap);
    c.experiment.terminal_fraction = detail::double_or_auto(f, "experiment.terminal_fraction", c.experiment.terminal_fraction);
    c.experiment.output_dir = f.get_string("experiment.output_dir", c.experiment.output_dir);
    c.experiment.parallelism = detail::size_or_auto(f, "experiment.parallelism", c.experiment.parallelism);
    if (c.experiment.parallelism == 0) c.experiment.parallelism = std::max(1u, std::thread::hardware_concurrency());
    c.experiment.inflation_constant =
        detail::double_or_auto(f, "experiment.inflation_constant", c.experiment.inflation_constant);
    c.experiment.reference_p0 = f.get_double("experiment.reference_p0", c.experiment.reference_p0);
    c.experiment.reference_q0 = f.get_double("experiment.reference_q0", c.experiment.reference_q0);
    c.experiment.snapshots = f.get_string("experiment.snapshots", c.experiment.snapshots);

    c.peakon.L = f.get_double("peakon.L", c.peakon.L);
    c.peakon.N = detail::size_or_auto(f, "peakon.N", c.peakon.N);
    c.peakon.horizon = f.get_double("peakon.horizon", c.peakon.horizon);
    c.peakon.tolerance = f.get_double("peakon.tolerance", c.peakon.tolerance);
    c.peakon.speed_tolerance = f.get_double("peakon.speed_tolerance", c.peakon.speed_tolerance);

    c.norms.p0 = f.get_double("norms.p0", c.norms.p0);
    c.norms.q0s = f.get_list("norms.q0", c.norms.q0s);
    c.norms.sigmas = f.get_list("norms.sigma", c.norms.sigmas);
    c.norms.L = f.get_double("norms.L", c.norms.L);
    c.norms.N = detail::size_or_auto(f, "norms.N", c.norms.N);
    c.norms.tolerance = f.get_double("norms.tolerance", c.norms.tolerance);

    f.require_all_used();
    c.validate();
    return c;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
    return load_experiment_config(ConfigFile::load(path));
}

inline Json to_json(const ExperimentConfig& c) {
    Json j;
    j["params"] = {{"p0", c.pair.p0}, {"q0", c.pair.q0}, {"s", json_number(c.pair.regime.s)},
                   {"p", json_number(c.pair.regime.p)}, {"r", json_number(c.pair.regime.r)},
                   {"delta", c.pair.delta}, {"sigma", c.sigma}};
    j["grid"] = {{"L", c.grid.L}, {"N", c.grid.N == 0 ? Json("auto") : Json(c.grid.N)},
                 {"n_floor", c.grid.n_floor}, {"n_cap", c.grid.n_cap}, {"points_across", c.grid.points_across}};
    j["solver"] = {{"cfl", c.solver.cfl},
                   {"flux", std::string(to_string(c.solver.flux))},
                   {"reconstruction", std::string(to_string(c.solver.reconstruction))},
                   {"nonlocal", std::string(to_string(c.solver.nonlocal))},
                   {"end_time", std::isnan(c.solver.end_time) ? Json("auto") : json_number(c.solver.end_time)},
                   {"blowup_threshold",
                    std::isnan(c.solver.blowup_threshold) ? Json("auto") : json_number(c.solver.blowup_threshold)},
                   {"snapshot_stride", c.solver.snapshot_stride},
                   {"raise_threshold", c.solver.raise_threshold}};
    j["seeds"] = {{"interior", c.seeds.interior}, {"exterior", c.seeds.exterior},
                  {"exterior_extent", c.seeds.exterior_extent}, {"proxy_offset", c.seeds.proxy_offset}};
    j["envelope"] = {{"channel", std::string(to_string(c.envelope.channel))},
                     {"sandwich_tolerance", c.envelope.sandwich_tolerance},
                     {"sandwich_limit", c.envelope.sandwich_limit},
                     {"sandwich_rate", c.envelope.sandwich_rate},
                     {"exterior_slack", c.envelope.exterior_slack},
                     {"exterior_limit", c.envelope.exterior_limit},
                     {"energy_factor", c.envelope.energy_factor},
                     {"energy_limit", c.envelope.energy_limit}};
    Json sched;
    if (c.pairs) {
        Json list = Json::array();
        for (const auto& e : *c.pairs) list.push_back({e.p0, e.q0});
        sched["pairs"] = list;
    } else {
        sched["p0_base"] = c.rule.p0_base;
        sched["q0_base"] = c.rule.q0_base;
        sched["a"] = c.rule.a;
        sched["k_min"] = c.rule.k_min;
        sched["k_max"] = c.rule.k_max;
    }
    j["schedule"] = sched;
    j["experiment"] = {
        {"terminal_gap", c.experiment.terminal_gap},
        {"terminal_fraction",
         std::isnan(c.experiment.terminal_fraction) ? Json("auto") : Json(c.experiment.terminal_fraction)},
        {"output_dir", c.experiment.output_dir},
        {"parallelism", c.experiment.parallelism},
        {"inflation_constant",
         std::isnan(c.experiment.inflation_constant) ? Json("auto") : json_number(c.experiment.inflation_constant)},
        {"reference_p0", c.experiment.reference_p0},
        {"reference_q0", c.experiment.reference_q0},
        {"snapshots", c.experiment.snapshots}};
    j["peakon"] = {{"L", c.peakon.L}, {"N", c.peakon.N}, {"horizon", c.peakon.horizon},
                   {"tolerance", c.peakon.tolerance}, {"speed_tolerance", c.peakon.speed_tolerance}};
    j["norms"] = {{"p0", c.norms.p0}, {"q0", c.norms.q0s}, {"sigma", c.norms.sigmas}, {"L", c.norms.L},
                  {"N", c.norms.N}, {"tolerance", c.norms.tolerance}};
    return j;
}

// ---------------------------------------------------------------------------------------------
// Single peakon-pair run

struct PairPlan {
    PeakonPairParams params;
    Grid grid;
    Lifespan lifespan;
    double t0;
    double end_time;
    double threshold;
    std::vector<double> marks;
};

inline double terminal_time(const ExperimentConfig& cfg, const PeakonPairParams& a) {
    const double tm = lifespan_bracket(a).t_min;
    const double t0 = std::isnan(cfg.experiment.terminal_fraction) ? tm * (1.0 - cfg.experiment.terminal_gap * a.q0)
                                                                   : tm * cfg.experiment.terminal_fraction;
    if (!(t0 > 0.0 && t0 < tm)) throw ConfigError("terminal time must lie in (0, T_min)");
    return t0;
}

inline PairPlan plan_pair(const ExperimentConfig& cfg, const PeakonPairParams& a) {
    a.validate();
    const Lifespan ls = lifespan_bracket(a);
    const double t0 = terminal_time(cfg, a);
    const double end = std::isnan(cfg.solver.end_time) ? 1.2 * ls.t_max : cfg.solver.end_time;
    double threshold = std::isnan(cfg.solver.blowup_threshold) ? 50.0 * a.p0 : cfg.solver.blowup_threshold;
    // The state at T0 must be produced before detection stops the run.
    if (cfg.solver.raise_threshold && t0 < end) threshold = std::max(threshold, 2.0 * std::abs(m_envelope(a, t0)));
    std::vector<double> marks;
    for (int k = 1; k <= 9; ++k) marks.push_back(0.1 * k * ls.t_min);
    marks.push_back(0.95 * ls.t_min);
    marks.push_back(t0);
    std::sort(marks.begin(), marks.end());
    marks.erase(std::unique(marks.begin(), marks.end(),
                            [](double x, double y) { return std::abs(x - y) <= 1e-12 * std::max(1.0, x); }),
                marks.end());
    std::erase_if(marks, [&](double t) { return !(t < end); });
    return {a, Grid(cfg.grid.L, cfg.grid.resolution_for(a.q0)), ls, t0, end, threshold, marks};
}

struct PairSimulation {
    PairPlan plan;
    Trajectory trajectory;
    CharacteristicBundle bundle;
};

inline PairSimulation simulate_pair(const ExperimentConfig& cfg, const PairPlan& plan) {
    const NonlocalEngine engine(plan.grid, cfg.solver.nonlocal);
    SolverConfig sc;
    sc.cfl = cfg.solver.cfl;
    sc.flux = cfg.solver.flux;
    sc.reconstruction = cfg.solver.reconstruction;
    sc.end_time = plan.end_time;
    sc.snapshot_stride = cfg.solver.snapshot_stride;
    sc.blowup_threshold = plan.threshold;
    sc.output_times = plan.marks;
    CharacteristicBundle bundle = make_pair_bundle(plan.params, cfg.seeds);
    Trajectory traj = evolve(engine, sample_u0(plan.params, plan.grid), sc, bundle);
    if (traj.breakdown && !plan.marks.empty() && traj.breakdown->time < plan.marks.front())
        throw NumericalError("breakdown at t = " + format_double(traj.breakdown->time) +
                             " before the first snapshot mark " + format_double(plan.marks.front()));
    return {plan, std::move(traj), std::move(bundle)};
}

struct EnergyRow {
    double t;
    double m;
    double M;
    double measured;
    double lagrangian;
    double lower;
};

struct RunReport {
    std::size_t index = 0;
    std::string status = "ok";
    std::string error;
    std::string directory;
    double p0 = unset, q0 = unset;
    std::size_t N = 0;
    double t_min = unset, t_max = unset, t0 = unset, end_time = unset, threshold = unset;
    std::size_t steps = 0;
    double breakdown_time = unset, breakdown_slope = unset;
    std::string breakdown_channel;
    bool breakdown_ok = false;
    double initial_besov = unset, initial_hs = unset, initial_hs_symbol = unset, initial_hs_exact = unset;
    Bracket hs_bracket{unset, unset};
    double e1_drift = unset, e2_drift = unset;
    double sandwich_rate = unset, sandwich_rate_grid = unset;
    double exterior_rate = unset, exterior_rate_grid = unset;
    double energy_ratio = unset, energy_ratio_lagrangian = unset;
    bool energy_pass = false, energy_pass_lagrangian = false;
    double m_ratio = unset;
    std::vector<EnergyRow> energy;
    bool terminal_reached = false;
    Certificate certificate{unset, unset, unset, unset, unset, unset, unset, false};
    double terminal_besov = unset;
    double inflation_constant = unset;
    bool pass = false;

    Json to_json() const {
        Json j;
        j["index"] = index;
        j["status"] = status;
        if (!error.empty()) j["error"] = error;
        j["directory"] = directory;
        j["p0"] = json_number(p0);
        j["q0"] = json_number(q0);
        j["N"] = N;
        j["lifespan"] = {{"t_min", json_number(t_min)},
                         {"t_max", json_number(t_max)},
                         {"in_open_interval", t_max > 1.0 / (3.0 * p0) && t_max < 2.0 / (3.0 * p0)}};
        j["terminal_time"] = json_number(t0);
        j["end_time"] = json_number(end_time);
        j["blowup_threshold"] = json_number(threshold);
        j["steps"] = steps;
        j["breakdown"] = {{"time", json_number(breakdown_time)},
                          {"over_t_min", json_number(breakdown_time / t_min)},
                          {"slope", json_number(breakdown_slope)},
                          {"channel", breakdown_channel},
                          {"verdict", breakdown_ok}};
        j["initial"] = {{"besov", json_number(initial_besov)},
                        {"hs_littlewood_paley", json_number(initial_hs)},
                        {"hs_symbol", json_number(initial_hs_symbol)},
                        {"hs_exact", json_number(initial_hs_exact)},
                        {"hs_bracket", {json_number(hs_bracket.lower), json_number(hs_bracket.upper)}}};
        j["conservation"] = {{"e1_drift", json_number(e1_drift)}, {"e2_relative_drift", json_number(e2_drift)}};
        j["sandwich"] = {{"rate", json_number(sandwich_rate)}, {"rate_grid_channel", json_number(sandwich_rate_grid)}};
        j["exterior"] = {{"rate", json_number(exterior_rate)}, {"rate_grid_channel", json_number(exterior_rate_grid)}};
        j["energy"] = {{"min_ratio", json_number(energy_ratio)},
                       {"min_ratio_lagrangian", json_number(energy_ratio_lagrangian)},
                       {"verdict", energy_pass},
                       {"verdict_lagrangian", energy_pass_lagrangian},
                       {"M_ratio", json_number(m_ratio)}};
        j["terminal"] = {{"reached", terminal_reached},
                         {"window_lp", json_number(certificate.window_lagrangian)},
                         {"window_lp_grid", json_number(certificate.window_grid)},
                         {"w1p", json_number(certificate.w1p_composite)},
                         {"w1p_grid", json_number(certificate.w1p_grid)},
                         {"besov", json_number(terminal_besov)},
                         {"inflation_constant", json_number(inflation_constant)},
                         {"threshold", json_number(certificate.threshold)},
                         {"verdict", certificate.pass}};
        j["pass"] = pass;
        return j;
    }
};

namespace detail {

inline double pass_rate_or_nan(const VerdictTable& t) { return t.rows.empty() ? unset : t.pass_rate(); }

inline void write_run_artifacts(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                                const PairSimulation& sim, const RunReport& rep,
                                const std::vector<VerdictTable>& tables) {
    prepare_dir(dir);
    const auto& plan = sim.plan;
    Json meta = meta_document("run", to_json(cfg));
    meta["pair"] = {{"p0", plan.params.p0}, {"q0", plan.params.q0}};
    meta["resolved"] = {{"N", plan.grid.size()},
                        {"terminal_time", plan.t0},
                        {"end_time", plan.end_time},
                        {"blowup_threshold", plan.threshold},
                        {"marks", plan.marks}};
    meta["breakdown_time"] = json_number(rep.breakdown_time);
    write_json(meta, dir / "meta.json");

    {
        CsvTable csv((dir / "diagnostics.csv").string(), {"t", "E1", "E2", "E3", "linf", "min_ux", "max_ux"});
        for (const auto& d : sim.trajectory.diagnostics) {
            csv << d.t << d.E1 << d.E2 << d.E3 << d.linf << d.min_ux << d.max_ux;
            csv.end_row();
        }
    }
    {
        CsvTable csv((dir / "characteristics.csv").string(),
                     {"t", "seed_label", "psi", "slope_interp", "slope_ode", "v_value"});
        const auto& seeds = sim.bundle.seeds();
        for (const auto& s : sim.bundle.samples())
            for (std::size_t i = 0; i < seeds.size(); ++i) {
                csv << s.t << seeds[i].label << s.psi[i] << s.slope_interp[i] << s.slope_ode[i] << s.v_value[i];
                csv.end_row();
            }
    }
    {
        CsvTable csv((dir / "envelope.csv").string(),
                     {"t", "m", "M", "A_measured", "A_lagrangian", "A_lower", "sandwich_pass", "sandwich_total",
                      "exterior_pass", "exterior_total"});
        for (const auto& e : rep.energy) {
            std::size_t sp = 0, st = 0, ep = 0, et = 0;
            for (const auto& tab : tables) {
                if (tab.channel != cfg.envelope.channel) continue;
                for (const auto& v : tab.rows) {
                    if (std::abs(v.t - e.t) > 1e-12 * std::max(1.0, e.t)) continue;
                    const bool ext = sim.bundle.seeds()[v.seed].kind == SeedKind::exterior;
                    (ext ? et : st) += 1;
                    (ext ? ep : sp) += v.pass ? 1 : 0;
                }
            }
            csv << e.t << e.m << e.M << e.measured << e.lagrangian << e.lower << sp << st << ep << et;
            csv.end_row();
        }
    }
    {
        CsvTable csv((dir / "verdicts.csv").string(),
                     {"check", "channel", "t", "seed_label", "slope", "lower", "upper", "pass"});
        for (std::size_t k = 0; k < tables.size(); ++k) {
            const char* check = k < 2 ? "sandwich" : "exterior";
            for (const auto& v : tables[k].rows) {
                csv << check << std::string(to_string(tables[k].channel)) << v.t << sim.bundle.seeds()[v.seed].label
                    << v.slope << v.lower << v.upper << v.pass;
                csv.end_row();
            }
        }
    }
    {
        const auto& rg = plan.params.regime;
        CsvTable csv((dir / "norms.csv").string(), {"label", "s", "p", "r", "value", "route"});
        auto row = [&](const char* label, double s, double p, double r, double v, const char* route) {
            csv << label << s << p << r << v << route;
            csv.end_row();
        };
        row("u0", rg.s, rg.p, rg.r, rep.initial_besov, "littlewood-paley");
        row("u0", cfg.sigma, 2.0, 2.0, rep.initial_hs, "littlewood-paley");
        row("u0", cfg.sigma, 2.0, 2.0, rep.initial_hs_symbol, "symbol");
        row("u0", cfg.sigma, 2.0, 2.0, rep.initial_hs_exact, "exact");
        if (rep.terminal_reached) {
            row("u(T0)", rg.s, rg.p, rg.r, rep.terminal_besov, "littlewood-paley");
            row("u(T0)", 1.0, rg.p, unset, rep.certificate.w1p_grid, "w1p-grid");
            row("u(T0)", 1.0, rg.p, unset, rep.certificate.w1p_composite, "w1p-composite");
            row("u_x(T0) window", 0.0, rg.p, unset, rep.certificate.window_lagrangian, "window-lagrangian");
            row("u_x(T0) window", 0.0, rg.p, unset, rep.certificate.window_grid, "window-grid");
        }
    }
    write_json(rep.to_json(), dir / "report.json");

    if (cfg.experiment.snapshots != "none") {
        const auto snap = prepare_dir(dir / "snapshots");
        const auto& tr = sim.trajectory;
        for (std::size_t i = 0; i < tr.times.size(); ++i) {
            const double t = tr.times[i];
            const bool terminal = std::abs(t - plan.t0) <= 1e-12 * std::max(1.0, t);
            const bool mark = std::any_of(plan.marks.begin(), plan.marks.end(),
                                          [&](double m) { return std::abs(t - m) <= 1e-12 * std::max(1.0, t); });
            const bool keep = i == 0 || terminal || (cfg.experiment.snapshots == "marks" && mark);
            if (!keep) continue;
            char name[48];
            std::snprintf(name, sizeof name, "%03zu", i);
            write_binary(tr.snapshots[i], (snap / (std::string("u_") + name + ".bin")).string());
            write_binary(tr.derivative_snapshots[i], (snap / (std::string("ux_") + name + ".bin")).string());
        }
        CsvTable idx((snap / "index.csv").string(), {"index", "t"});
        for (std::size_t i = 0; i < tr.times.size(); ++i) {
            idx << i << tr.times[i];
            idx.end_row();
        }
    }
}

}  // namespace detail

// Envelope, energy, norm and certificate analysis of a finished simulation.
inline RunReport analyse_pair(const ExperimentConfig& cfg, const PairSimulation& sim, double inflation_constant,
                              std::vector<VerdictTable>* tables_out = nullptr) {
    const auto& plan = sim.plan;
    const auto& a = plan.params;
    const auto& tr = sim.trajectory;
    const auto& env = cfg.envelope;
    RunReport rep;
    rep.p0 = a.p0;
    rep.q0 = a.q0;
    rep.N = plan.grid.size();
    rep.t_min = plan.lifespan.t_min;
    rep.t_max = plan.lifespan.t_max;
    rep.t0 = plan.t0;
    rep.end_time = plan.end_time;
    rep.threshold = plan.threshold;
    rep.steps = tr.steps;
    rep.inflation_constant = inflation_constant;

    const double lo = 0.9 * rep.t_min, hi = 1.1 * rep.t_max;
    if (tr.breakdown) {
        rep.breakdown_time = tr.breakdown->time;
        rep.breakdown_slope = tr.breakdown->slope;
        rep.breakdown_channel = tr.breakdown->channel;
        rep.breakdown_ok = rep.breakdown_time >= lo && rep.breakdown_time <= hi;
    } else {
        rep.breakdown_ok = plan.end_time < hi;
    }

    // Conservation over the steps preceding detection.
    const auto& diag = tr.diagnostics;
    const std::size_t last = tr.breakdown && diag.size() > 1 ? diag.size() - 2 : diag.size() - 1;
    rep.e1_drift = 0.0;
    rep.e2_drift = 0.0;
    for (std::size_t i = 0; i <= last; ++i) {
        rep.e1_drift = std::max(rep.e1_drift, std::abs(diag[i].E1 - diag[0].E1));
        const double d = diag[i].E2 / diag[0].E2 - 1.0;
        if (std::abs(d) > std::abs(rep.e2_drift)) rep.e2_drift = d;
    }

    const DyadicPartition part(plan.grid);
    const Field& u0 = tr.snapshots.front();
    rep.initial_besov = besov_norm(part, u0, a.regime.s, a.regime.p, a.regime.r);
    rep.initial_hs = sobolev_norm(part, u0, cfg.sigma);
    rep.initial_hs_symbol = sobolev_norm_symbol(u0, cfg.sigma);
    rep.initial_hs_exact = hs_norm_exact(a.p0, a.q0, cfg.sigma);
    rep.hs_bracket = hs_norm_bracket(a, cfg.sigma);

    const double last_t = sim.bundle.latest().t;
    const double t_sand = std::min(env.sandwich_limit * rep.t_min, last_t);
    const double t_ext = std::min(env.exterior_limit * rep.t_min, last_t);
    const auto other = env.channel == SlopeChannel::characteristic ? SlopeChannel::grid : SlopeChannel::characteristic;
    std::vector<VerdictTable> tables;
    tables.push_back(check_sandwich(sim.bundle, a, t_sand, env.channel, env.sandwich_tolerance));
    tables.push_back(check_sandwich(sim.bundle, a, t_sand, other, env.sandwich_tolerance));
    tables.push_back(check_exterior(sim.bundle, a, t_ext, env.channel, env.exterior_slack));
    tables.push_back(check_exterior(sim.bundle, a, t_ext, other, env.exterior_slack));
    const bool char_first = env.channel == SlopeChannel::characteristic;
    rep.sandwich_rate = detail::pass_rate_or_nan(tables[char_first ? 0 : 1]);
    rep.sandwich_rate_grid = detail::pass_rate_or_nan(tables[char_first ? 1 : 0]);
    rep.exterior_rate = detail::pass_rate_or_nan(tables[char_first ? 2 : 3]);
    rep.exterior_rate_grid = detail::pass_rate_or_nan(tables[char_first ? 3 : 2]);
    const double chosen_sandwich = detail::pass_rate_or_nan(tables[0]);
    const double chosen_exterior = detail::pass_rate_or_nan(tables[2]);

    // A(t) at every stored time in (0, energy_limit T_min], plus t = 0.
    rep.energy_pass = true;
    rep.energy_pass_lagrangian = true;
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        const double t = tr.times[i];
        if (t > plan.t0 * (1.0 + 1e-12)) break;
        if (!sim.bundle.find_time(t)) continue;
        EnergyRow row{t, m_envelope(a, t), M_envelope(a, t), energy_A(tr, sim.bundle, t),
                      energy_A_lagrangian(sim.bundle, t, a.q0), energy_lower_bound(a, t)};
        rep.energy.push_back(row);
        if (t > env.energy_limit * rep.t_min * (1.0 + 1e-12)) continue;
        const double need = env.energy_factor * row.lower;
        rep.energy_pass = rep.energy_pass && row.measured >= need;
        rep.energy_pass_lagrangian = rep.energy_pass_lagrangian && row.lagrangian >= need;
        if (row.lower > 0.0 && t > 0.0) {
            rep.energy_ratio = std::isnan(rep.energy_ratio) ? row.measured / row.lower
                                                            : std::min(rep.energy_ratio, row.measured / row.lower);
            rep.energy_ratio_lagrangian = std::isnan(rep.energy_ratio_lagrangian)
                                              ? row.lagrangian / row.lower
                                              : std::min(rep.energy_ratio_lagrangian, row.lagrangian / row.lower);
        }
    }
    rep.m_ratio = energy_asymptotics(a).m_ratio;

    rep.terminal_reached = tr.find_time(plan.t0).has_value() && sim.bundle.find_time(plan.t0).has_value();
    if (rep.terminal_reached) {
        const double c = std::isnan(inflation_constant) ? 0.0 : inflation_constant;
        rep.certificate = inflation_certificate(tr, sim.bundle, a, plan.t0, a.regime.p, c);
        if (std::isnan(inflation_constant)) {
            rep.certificate.threshold = unset;
            rep.certificate.pass = false;
        }
        rep.terminal_besov = besov_norm(part, tr.snapshots[*tr.find_time(plan.t0)], a.regime.s, a.regime.p, a.regime.r);
    }

    const bool terminal_ok = std::isnan(inflation_constant) || rep.certificate.pass;
    const bool terminal_expected = plan.t0 < plan.end_time;
    rep.pass = rep.breakdown_ok && !(chosen_sandwich < env.sandwich_rate) && !(chosen_exterior < 1.0) &&
               rep.energy_pass && terminal_ok && (rep.terminal_reached || !terminal_expected);
    if (tables_out) *tables_out = std::move(tables);
    return rep;
}

// Plans, simulates, analyses and (when dir is non-empty) writes one run directory.
inline RunReport run_pair(const ExperimentConfig& cfg, const PeakonPairParams& a, const std::string& dir,
                          double inflation_constant = unset) {
    const PairSimulation sim = simulate_pair(cfg, plan_pair(cfg, a));
    std::vector<VerdictTable> tables;
    RunReport rep = analyse_pair(cfg, sim, inflation_constant, &tables);
    rep.directory = dir;
    if (!dir.empty()) detail::write_run_artifacts(dir, cfg, sim, rep, tables);
    return rep;
}

// c in the terminal bound window-L^p >= c sqrt(p0): half the ratio measured at the reference pair.
inline double inflation_constant_from(const RunReport& reference) {
    if (!reference.terminal_reached || !(reference.certificate.window_lagrangian > 0.0))
        throw NumericalError("reference run did not reach its terminal time");
    return 0.5 * reference.certificate.window_lagrangian / std::sqrt(reference.p0);
}

// ---------------------------------------------------------------------------------------------
// Sweep

struct SweepReport {
    std::vector<RunReport> rows;
    double inflation_constant = unset;
    std::string constant_source;
    bool initial_decreasing = false;
    bool terminal_increasing = false;
    bool window_increasing = false;
    bool certificates_pass = false;
    bool all_completed = false;
    bool numerical_failure = false;
    std::vector<bool> initial_below_delta, terminal_above_inverse_delta, t0_below_delta;
    double window_growth_exponent = unset;  // least-squares slope of log window vs log p0
    bool pass = false;

    Json to_json() const {
        Json j;
        j["inflation_constant"] = json_number(inflation_constant);
        j["constant_source"] = constant_source;
        j["initial_besov_strictly_decreasing"] = initial_decreasing;
        j["terminal_w1p_strictly_increasing"] = terminal_increasing;
        j["terminal_window_strictly_increasing"] = window_increasing;
        j["certificates_pass"] = certificates_pass;
        j["all_rows_completed"] = all_completed;
        j["delta_conditions"] = {{"initial_below_delta", initial_below_delta},
                                 {"terminal_above_inverse_delta", terminal_above_inverse_delta},
                                 {"terminal_time_below_delta", t0_below_delta}};
        j["window_growth_exponent_in_p0"] = json_number(window_growth_exponent);
        Json rows_json = Json::array();
        for (const auto& r : rows) rows_json.push_back(r.to_json());
        j["rows"] = rows_json;
        j["pass"] = pass;
        return j;
    }
};

inline double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw ConfigError("least_squares_slope needs two or more points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline void summarise_sweep(SweepReport& rep, double delta) {
    const auto& rows = rep.rows;
    rep.all_completed = std::all_of(rows.begin(), rows.end(), [](const RunReport& r) { return r.status == "ok"; });
    rep.numerical_failure =
        std::any_of(rows.begin(), rows.end(), [](const RunReport& r) { return r.status == "numerical-failure"; });
    auto strictly = [&](auto key, bool up) {
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const double a = key(rows[i - 1]), b = key(rows[i]);
            if (!(up ? b > a : b < a)) return false;
        }
        return true;
    };
    rep.initial_decreasing = strictly([](const RunReport& r) { return r.initial_besov; }, false);
    rep.terminal_increasing = strictly([](const RunReport& r) { return r.certificate.w1p_composite; }, true);
    rep.window_increasing = strictly([](const RunReport& r) { return r.certificate.window_lagrangian; }, true);
    rep.certificates_pass = std::all_of(rows.begin(), rows.end(), [](const RunReport& r) { return r.certificate.pass; });
    rep.initial_below_delta.clear();
    rep.terminal_above_inverse_delta.clear();
    rep.t0_below_delta.clear();
    std::vector<double> lx, ly;
    for (const auto& r : rows) {
        rep.initial_below_delta.push_back(r.initial_besov <= delta);
        rep.terminal_above_inverse_delta.push_back(r.certificate.w1p_composite >= 1.0 / delta);
        rep.t0_below_delta.push_back(r.t0 < delta);
        if (r.certificate.window_lagrangian > 0.0) {
            lx.push_back(std::log(r.p0));
            ly.push_back(std::log(r.certificate.window_lagrangian));
        }
    }
    if (lx.size() >= 2) rep.window_growth_exponent = least_squares_slope(lx, ly);
    rep.pass = rep.all_completed && rep.initial_decreasing && rep.terminal_increasing && rep.certificates_pass;
}

inline void write_sweep_table(const std::filesystem::path& path, const SweepReport& rep) {
    CsvTable csv(path.string(),
                 {"index", "p0", "q0", "N", "status", "initial_besov", "initial_hs", "initial_hs_exact", "t_min",
                  "t_max", "t0", "breakdown_time", "terminal_w1p", "terminal_w1p_grid", "window_lp", "window_lp_grid",
                  "terminal_besov", "sandwich_rate", "exterior_rate", "energy_pass", "certificate_threshold",
                  "certificate_pass", "run_dir"});
    for (const auto& r : rep.rows) {
        csv << r.index << r.p0 << r.q0 << r.N << r.status << r.initial_besov << r.initial_hs << r.initial_hs_exact
            << r.t_min << r.t_max << r.t0 << r.breakdown_time << r.certificate.w1p_composite << r.certificate.w1p_grid
            << r.certificate.window_lagrangian << r.certificate.window_grid << r.terminal_besov << r.sandwich_rate
            << r.exterior_rate << r.energy_pass << r.certificate.threshold << r.certificate.pass
            << std::filesystem::path(r.directory).filename().string();
        csv.end_row();
    }
}

inline RunReport guarded_run(const ExperimentConfig& cfg, std::size_t index, const SchedulePair& e,
                             const std::string& dir, double c) {
    RunReport failed;
    failed.index = index;
    failed.p0 = e.p0;
    failed.q0 = e.q0;
    failed.directory = dir;
    try {
        RunReport r = run_pair(cfg, cfg.params(e.p0, e.q0), dir, c);
        r.index = index;
        return r;
    } catch (const NumericalError& err) {
        failed.status = "numerical-failure";
        failed.error = err.what();
    } catch (const std::exception& err) {
        failed.status = "error";
        failed.error = err.what();
    }
    if (!dir.empty()) {
        prepare_dir(dir);
        write_json(failed.to_json(), std::filesystem::path(dir) / "report.json");
    }
    return failed;
}

// Runs every schedule row (up to `parallelism` at once) and folds the rows in schedule order.
inline SweepReport run_sweep(const ExperimentConfig& cfg, const std::string& out_dir) {
    const auto schedule = cfg.schedule();
    SweepReport rep;
    const std::filesystem::path root = out_dir.empty() ? std::filesystem::path() : prepare_dir(out_dir);

    rep.inflation_constant = cfg.experiment.inflation_constant;
    rep.constant_source = "config";
    if (std::isnan(rep.inflation_constant) && !schedule.empty()) {
        const auto ref = cfg.params(cfg.experiment.reference_p0, cfg.experiment.reference_q0);
        const RunReport r = run_pair(cfg, ref, root.empty() ? "" : (root / "reference").string());
        rep.inflation_constant = inflation_constant_from(r);
        rep.constant_source = "reference p0=" + format_double(ref.p0) + " q0=" + format_double(ref.q0);
    }

    rep.rows.resize(schedule.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < schedule.size(); i = next++) {
            char name[32];
            std::snprintf(name, sizeof name, "row-%02zu", i);
            rep.rows[i] = guarded_run(cfg, i, schedule[i], root.empty() ? "" : (root / name).string(),
                                      rep.inflation_constant);
        }
    };
    {
        const std::size_t n = std::min<std::size_t>(cfg.experiment.parallelism, std::max<std::size_t>(1, schedule.size()));
        std::vector<std::jthread> pool;
        for (std::size_t k = 1; k < n; ++k) pool.emplace_back(worker);
        worker();
    }
    summarise_sweep(rep, cfg.pair.delta);

    if (!root.empty()) {
        Json meta = meta_document("sweep", to_json(cfg));
        meta["inflation_constant"] = json_number(rep.inflation_constant);
        write_json(meta, root / "meta.json");
        write_sweep_table(root / "inflation.csv", rep);
        write_json(rep.to_json(), root / "report.json");
    }
    return rep;
}

// ---------------------------------------------------------------------------------------------
// Peakon check

struct PeakonReport {
    double L = 0.0;
    std::size_t N = 0;
    double horizon = 0.0;
    double shape_error = 0.0;
    double crest_speed = unset;
    double crest_speed_error = unset;
    double crest_u_residual = unset;
    std::size_t steps = 0;
    bool pass = false;

    Json to_json() const {
        return {{"L", L},
                {"N", N},
                {"horizon", horizon},
                {"relative_l2_error", shape_error},
                {"crest_speed", json_number(crest_speed)},
                {"exact_speed", peakon_speed},
                {"crest_speed_relative_error", json_number(crest_speed_error)},
                {"crest_u_residual", json_number(crest_u_residual)},
                {"steps", steps},
                {"pass", pass}};
    }
};

inline PeakonReport run_peakon_check(const ExperimentConfig& cfg, const std::string& dir) {
    const auto& pk = cfg.peakon;
    const Grid g(pk.L, pk.N);
    const NonlocalEngine engine(g, cfg.solver.nonlocal);
    PeakonReport rep;
    rep.L = pk.L;
    rep.N = pk.N;
    rep.horizon = pk.horizon;
    const Field start = sample_peakon(g, 0.0);
    std::vector<double> times{0.0};
    std::vector<double> errors{0.0};
    std::vector<double> crest{0.0};
    Field final = start;
    if (pk.horizon > 0.0) {
        SolverConfig sc;
        sc.cfl = cfg.solver.cfl;
        sc.flux = cfg.solver.flux;
        sc.reconstruction = cfg.solver.reconstruction;
        sc.end_time = pk.horizon;
        sc.snapshot_stride = cfg.solver.snapshot_stride;
        for (int k = 1; k < 10; ++k) sc.output_times.push_back(0.1 * k * pk.horizon);
        CharacteristicBundle b({Seed{0.0, SeedKind::custom, "crest"}});
        const Trajectory tr = evolve(engine, start, sc, b);
        for (std::size_t i = 1; i < tr.times.size(); ++i) {
            times.push_back(tr.times[i]);
            errors.push_back(relative_l2(tr.snapshots[i], sample_peakon(g, tr.times[i])));
            crest.push_back(b.samples()[*b.find_time(tr.times[i])].psi[0]);
        }
        final = tr.snapshots.back();
        rep.steps = tr.steps;
        rep.shape_error = errors.back();
        rep.crest_speed = b.latest().psi[0] / b.latest().t;
        rep.crest_speed_error = std::abs(rep.crest_speed / peakon_speed - 1.0);
        rep.crest_u_residual = u_along_residual(b.latest())[0];
        rep.pass = rep.shape_error <= pk.tolerance && rep.crest_speed_error <= pk.speed_tolerance;
    } else {
        rep.shape_error = relative_l2(start, sample_peakon(g, 0.0));
        rep.pass = rep.shape_error <= pk.tolerance;
    }
    if (!dir.empty()) {
        const auto root = prepare_dir(dir);
        write_json(meta_document("peakon-check", to_json(cfg)), root / "meta.json");
        {
            CsvTable csv((root / "peakon.csv").string(), {"t", "relative_l2_error", "crest_position", "exact_crest"});
            for (std::size_t i = 0; i < times.size(); ++i) {
                csv << times[i] << errors[i] << crest[i] << peakon_speed * times[i];
                csv.end_row();
            }
        }
        {
            CsvTable csv((root / "profile.csv").string(), {"x", "numerical", "exact"});
            const Field exact = sample_peakon(g, pk.horizon);
            for (std::size_t j = 0; j < g.size(); ++j) {
                csv << g.x(j) << final[j] << exact[j];
                csv.end_row();
            }
        }
        write_json(rep.to_json(), root / "report.json");
    }
    return rep;
}

// ---------------------------------------------------------------------------------------------
// Norm scaling in q0

struct NormRow {
    std::string label;
    double s, p, r, value;
    std::string route;
};

struct ScalingFit {
    double sigma;
    double target;
    double slope_exact;
    double slope_measured;
    double slope_symbol;
    double calibration_constant;
    bool bracket_holds;
    bool pass;
};

struct NormsReport {
    std::vector<NormRow> rows;
    std::vector<ScalingFit> fits;
    bool pass = false;

    Json to_json() const {
        Json fj = Json::array();
        for (const auto& f : fits)
            fj.push_back({{"sigma", f.sigma},
                          {"target_slope", f.target},
                          {"slope_exact", f.slope_exact},
                          {"slope_littlewood_paley", f.slope_measured},
                          {"slope_symbol", f.slope_symbol},
                          {"relative_deviation", f.slope_measured / f.target - 1.0},
                          {"bracket_constant", f.calibration_constant},
                          {"bracket_holds", f.bracket_holds},
                          {"pass", f.pass}});
        return {{"fits", fj}, {"pass", pass}};
    }
};

inline NormsReport run_norms(const ExperimentConfig& cfg, const std::string& dir) {
    const auto& ns = cfg.norms;
    const Grid g(ns.L, ns.N);
    const DyadicPartition part(g);
    NormsReport rep;
    rep.pass = true;
    std::vector<double> logq;
    for (double q : ns.q0s) logq.push_back(std::log(q));
    for (double sigma : ns.sigmas) {
        std::vector<double> ex, lp, sy;
        const double constant = calibrate_hs_constant(sigma);
        bool bracket = true;
        for (double q : ns.q0s) {
            const PeakonPairParams a = cfg.params(ns.p0, q);
            const Field u0 = sample_u0(a, g);
            char label[48];
            std::snprintf(label, sizeof label, "u0(p0=%g,q0=%g)", ns.p0, q);
            const double e = hs_norm_exact(ns.p0, q, sigma);
            const double m = sobolev_norm(part, u0, sigma);
            const double s = sobolev_norm_symbol(u0, sigma);
            bracket = bracket && hs_norm_bracket(a, sigma, constant).contains(e);
            rep.rows.push_back({label, sigma, 2.0, 2.0, e, "exact"});
            rep.rows.push_back({label, sigma, 2.0, 2.0, m, "littlewood-paley"});
            rep.rows.push_back({label, sigma, 2.0, 2.0, s, "symbol"});
            ex.push_back(std::log(e));
            lp.push_back(std::log(m));
            sy.push_back(std::log(s));
        }
        ScalingFit f{sigma,
                     1.5 - sigma,
                     least_squares_slope(logq, ex),
                     least_squares_slope(logq, lp),
                     least_squares_slope(logq, sy),
                     constant,
                     bracket,
                     false};
        f.pass = std::abs(f.slope_measured / f.target - 1.0) <= ns.tolerance;
        rep.pass = rep.pass && f.pass;
        rep.fits.push_back(f);
    }
    for (double q : ns.q0s) {
        const PeakonPairParams a = cfg.params(ns.p0, q);
        const auto& rg = a.regime;
        char label[48];
        std::snprintf(label, sizeof label, "u0(p0=%g,q0=%g)", ns.p0, q);
        rep.rows.push_back({label, rg.s, rg.p, rg.r, besov_norm(part, sample_u0(a, g), rg.s, rg.p, rg.r),
                            "littlewood-paley"});
    }
    if (!dir.empty()) {
        const auto root = prepare_dir(dir);
        write_json(meta_document("norms", to_json(cfg)), root / "meta.json");
        {
            CsvTable csv((root / "norms.csv").string(), {"label", "s", "p", "r", "value", "route"});
            for (const auto& r : rep.rows) {
                csv << r.label << r.s << r.p << r.r << r.value << r.route;
                csv.end_row();
            }
        }
        {
            CsvTable csv((root / "scaling.csv").string(),
                         {"sigma", "target", "slope_exact", "slope_littlewood_paley", "slope_symbol", "pass"});
            for (const auto& f : rep.fits) {
                csv << f.sigma << f.target << f.slope_exact << f.slope_measured << f.slope_symbol << f.pass;
                csv.end_row();
            }
        }
        write_json(rep.to_json(), root / "report.json");
    }
    return rep;
}

// ---------------------------------------------------------------------------------------------
// Closed-form envelope table

struct EnvelopeReport {
    Lifespan lifespan;
    EnergyAsymptotics asymptotics;
    bool ordered;
    bool t_max_in_interval;
    double a0;
    bool pass;

    Json to_json(const PeakonPairParams& a) const {
        return {{"p0", a.p0},
                {"q0", a.q0},
                {"t_min", lifespan.t_min},
                {"t_max", lifespan.t_max},
                {"t_min_below_t_max", ordered},
                {"t_max_in_open_interval", t_max_in_interval},
                {"A0", a0},
                {"M_ratio", asymptotics.m_ratio},
                {"M_ratio_times_q0", asymptotics.m_ratio * a.q0},
                {"p0_int_exp_minus_B", asymptotics.p0_int_exp_minus_B},
                {"A_lower_at_t_min", asymptotics.lower_at_t_min},
                {"A_lower_over_p0_squared", asymptotics.lower_over_p0_sq},
                {"pass", pass}};
    }
};

inline EnvelopeReport run_envelope(const ExperimentConfig& cfg, const std::string& dir) {
    const PeakonPairParams& a = cfg.pair;
    a.validate();
    EnvelopeReport rep{lifespan_bracket(a), energy_asymptotics(a), false, false, a0_exact(a), false};
    rep.ordered = rep.lifespan.t_min < rep.lifespan.t_max;
    rep.t_max_in_interval = rep.lifespan.t_max > 1.0 / (3.0 * a.p0) && rep.lifespan.t_max < 2.0 / (3.0 * a.p0);
    rep.pass = rep.ordered && rep.t_max_in_interval;
    if (!dir.empty()) {
        const auto root = prepare_dir(dir);
        write_json(meta_document("envelope", to_json(cfg)), root / "meta.json");
        CsvTable csv((root / "envelope.csv").string(), {"t", "m", "M", "exp_B", "int_exp_minus_B", "A_lower"});
        for (int k = 0; k < 100; ++k) {
            const double t = rep.lifespan.t_min * k / 100.0;
            csv << t << m_envelope(a, t) << M_envelope(a, t) << exp_B(a, t) << int_exp_minus_B(a, t)
                << energy_lower_bound(a, t);
            csv.end_row();
        }
        write_json(rep.to_json(a), root / "report.json");
    }
    return rep;
}

}  // namespace fwlab
