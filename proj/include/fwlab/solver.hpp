#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fwlab/grid.hpp"
#include "fwlab/initial_data.hpp"
#include "fwlab/nonlocal.hpp"

namespace fwlab {

enum class Flux { local_lax_friedrichs, rusanov };
enum class Reconstruction { weno5_z, muscl_mc };

inline std::string_view to_string(Flux f) {
    return f == Flux::local_lax_friedrichs ? "local-lax-friedrichs" : "rusanov";
}
inline std::string_view to_string(Reconstruction r) {
    return r == Reconstruction::weno5_z ? "weno5-z" : "muscl-mc";
}
inline Flux parse_flux(std::string_view s) {
    if (s == "local-lax-friedrichs" || s == "llf") return Flux::local_lax_friedrichs;
    if (s == "rusanov") return Flux::rusanov;
    throw ConfigError("unknown flux '" + std::string(s) + "'");
}
inline Reconstruction parse_reconstruction(std::string_view s) {
    if (s == "weno5-z") return Reconstruction::weno5_z;
    if (s == "muscl-mc") return Reconstruction::muscl_mc;
    throw ConfigError("unknown reconstruction '" + std::string(s) + "'");
}

struct SolverConfig {
    double cfl = 0.3;
    Flux flux = Flux::local_lax_friedrichs;
    Reconstruction reconstruction = Reconstruction::weno5_z;
    double end_time = 1.0;
    std::size_t snapshot_stride = 10;
    double blowup_threshold = infinity;
    // Times at which a snapshot is forced; the step size is clipped to land on them.
    std::vector<double> output_times;
    // Switching the nonlocal source off leaves the pure transport u_t + (3/2) u u_x = 0.
    bool include_source = true;

    void validate() const {
        if (!(cfl > 0.0 && cfl <= 0.5)) throw ConfigError("cfl must lie in (0, 0.5]");
        if (!(end_time > 0.0)) throw ConfigError("end_time must be positive");
        if (!(blowup_threshold > 0.0)) throw ConfigError("blowup_threshold must be positive");
        if (snapshot_stride == 0) throw ConfigError("snapshot_stride must be at least 1");
    }

    static SolverConfig for_pair(const PeakonPairParams& a) {
        SolverConfig c;
        c.blowup_threshold = 50.0 * a.p0;
        return c;
    }
};

struct StepDiagnostics {
    double t;
    double E1;
    double E2;
    double E3;
    double linf;
    double min_ux;
    double max_ux;
};

struct Breakdown {
    double time;
    double slope;
    std::string channel;  // "grid" or "characteristic"
    std::size_t step;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Field> snapshots;
    std::vector<Field> derivative_snapshots;
    std::vector<StepDiagnostics> diagnostics;
    std::optional<Breakdown> breakdown;
    std::size_t steps = 0;

    std::optional<double> breakdown_time() const {
        return breakdown ? std::optional<double>(breakdown->time) : std::nullopt;
    }

    // Index of the stored time closest to t, if within tol.
    std::optional<std::size_t> find_time(double t, double tol = 1e-12) const {
        for (std::size_t i = 0; i < times.size(); ++i)
            if (std::abs(times[i] - t) <= tol * std::max(1.0, std::abs(t))) return i;
        return std::nullopt;
    }
};

namespace detail {

inline double mc_slope(double dm, double dp) {
    if (dm * dp <= 0.0) return 0.0;
    const double s = dm > 0.0 ? 1.0 : -1.0;
    return s * std::min({2.0 * std::abs(dm), 0.5 * std::abs(dm + dp), 2.0 * std::abs(dp)});
}

// Left-biased value at the right face of the middle cell of (a, b, c, d, e) = u_{i-2..i+2}.
inline double weno5z_face(double a, double b, double c, double d, double e) {
    const double q0 = (2.0 * a - 7.0 * b + 11.0 * c) / 6.0;
    const double q1 = (-b + 5.0 * c + 2.0 * d) / 6.0;
    const double q2 = (2.0 * c + 5.0 * d - e) / 6.0;
    const double b0 = 13.0 / 12.0 * (a - 2.0 * b + c) * (a - 2.0 * b + c) + 0.25 * (a - 4.0 * b + 3.0 * c) * (a - 4.0 * b + 3.0 * c);
    const double b1 = 13.0 / 12.0 * (b - 2.0 * c + d) * (b - 2.0 * c + d) + 0.25 * (b - d) * (b - d);
    const double b2 = 13.0 / 12.0 * (c - 2.0 * d + e) * (c - 2.0 * d + e) + 0.25 * (3.0 * c - 4.0 * d + e) * (3.0 * c - 4.0 * d + e);
    constexpr double eps = 1e-40;
    const double tau = std::abs(b0 - b2);
    const double a0 = 0.1 * (1.0 + tau / (b0 + eps));
    const double a1 = 0.6 * (1.0 + tau / (b1 + eps));
    const double a2 = 0.3 * (1.0 + tau / (b2 + eps));
    return (a0 * q0 + a1 * q1 + a2 * q2) / (a0 + a1 + a2);
}

inline double burgers_flux(double u) { return 0.75 * u * u; }

// -(F_{j+1/2} - F_{j-1/2}) / h for f(u) = (3/4) u^2 with periodic wrap.
inline std::vector<double> transport_divergence(std::span<const double> u, double h, Flux flux,
                                                Reconstruction rec) {
    const std::size_t n = u.size();
    constexpr std::size_t ghost = 3;
    std::vector<double> ext(n + 2 * ghost);
    for (std::size_t k = 0; k < ext.size(); ++k)
        ext[k] = u[wrap(static_cast<std::ptrdiff_t>(k) - static_cast<std::ptrdiff_t>(ghost), n)];
    const double* v = ext.data() + ghost;  // v[i] = u_i for i in [-3, n + 2]

    std::vector<double> face(n + 1);  // face[j] = F at x_{j-1/2}
    for (std::size_t jj = 0; jj <= n; ++jj) {
        const auto i = static_cast<std::ptrdiff_t>(jj) - 1;
        double ul, ur;
        if (rec == Reconstruction::weno5_z) {
            ul = weno5z_face(v[i - 2], v[i - 1], v[i], v[i + 1], v[i + 2]);
            ur = weno5z_face(v[i + 3], v[i + 2], v[i + 1], v[i], v[i - 1]);
        } else {
            ul = v[i] + 0.5 * mc_slope(v[i] - v[i - 1], v[i + 1] - v[i]);
            ur = v[i + 1] - 0.5 * mc_slope(v[i + 1] - v[i], v[i + 2] - v[i + 1]);
        }
        const double speed = flux == Flux::local_lax_friedrichs
                                 ? 1.5 * std::max(std::abs(ul), std::abs(ur))
                                 : 1.5 * std::max(std::abs(v[i]), std::abs(v[i + 1]));
        face[jj] = 0.5 * (burgers_flux(ul) + burgers_flux(ur)) - 0.5 * speed * (ur - ul);
    }
    std::vector<double> out(n);
    const double inv = 1.0 / h;
    for (std::size_t j = 0; j < n; ++j) out[j] = -(face[j + 1] - face[j]) * inv;
    return out;
}

}  // namespace detail

// Semi-discrete right-hand side -d/dx((3/4) u^2) + d/dx (1 - d^2)^{-1} u.
inline Field rhs(const NonlocalEngine& e, const Field& u, const SolverConfig& cfg = {}) {
    require_same_grid(u.grid(), e.grid(), "rhs");
    auto div = detail::transport_divergence(u.values(), u.grid().spacing(), cfg.flux, cfg.reconstruction);
    if (cfg.include_source) {
        const Field s = e.source_term(u);
        for (std::size_t j = 0; j < div.size(); ++j) div[j] += s[j];
    }
    return Field(u.grid(), std::move(div));
}

inline double stable_dt(const Field& u, double cfl) {
    constexpr double floor_speed = 1e-12;
    return cfl * u.grid().spacing() / std::max(floor_speed, 1.5 * u.max_abs());
}

struct StageFields {
    Field stage1;  // at t + dt
    Field stage2;  // at t + dt/2
    Field next;    // at t + dt
};

// One SSP-RK3 step, returning the intermediate stages for observers.
inline StageFields step_stages(const NonlocalEngine& e, const Field& u, double dt, const SolverConfig& cfg = {}) {
    if (!(dt > 0.0) || dt > stable_dt(u, cfg.cfl) * (1.0 + 1e-12))
        throw NumericalError("time step " + format_double(dt) + " violates the CFL bound " +
                             format_double(stable_dt(u, cfg.cfl)));
    const Field l0 = rhs(e, u, cfg);
    Field u1 = zip(u, l0, [dt](double a, double b) { return a + dt * b; });
    const Field l1 = rhs(e, u1, cfg);
    std::vector<double> v2(u.size());
    for (std::size_t j = 0; j < v2.size(); ++j) v2[j] = 0.75 * u[j] + 0.25 * (u1[j] + dt * l1[j]);
    Field u2(u.grid(), std::move(v2));
    const Field l2 = rhs(e, u2, cfg);
    std::vector<double> v3(u.size());
    for (std::size_t j = 0; j < v3.size(); ++j) v3[j] = u[j] / 3.0 + 2.0 / 3.0 * (u2[j] + dt * l2[j]);
    Field next(u.grid(), std::move(v3));
    return {std::move(u1), std::move(u2), std::move(next)};
}

inline Field step(const NonlocalEngine& e, const Field& u, double dt, const SolverConfig& cfg = {}) {
    return step_stages(e, u, dt, cfg).next;
}

struct Conserved {
    double E1;
    double E2;
    double E3;
};

inline Conserved conserved_quantities(const NonlocalEngine& e, const Field& u) {
    const Field g = e.helmholtz_inverse(u);
    double e1 = 0.0, e2 = 0.0, e3 = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        e1 += u[j];
        e2 += u[j] * u[j];
        e3 += u[j] * g[j] - u[j] * u[j] * u[j];
    }
    const double h = u.grid().spacing();
    return {h * e1, h * e2, h * e3};
}

// Everything an observer may need about one completed step.
struct StepContext {
    std::size_t step;
    double t;   // time at the start of the step
    double dt;
    const Field& u;
    const Field& stage1;
    const Field& stage2;
    const Field& next;
    const NonlocalEngine& engine;
};

template <class O>
concept StepObserver = requires(O& o, const NonlocalEngine& e, const Field& f, const StepContext& c) {
    o.start(e, f);
    o.advance(c);
    { o.min_slope() } -> std::convertible_to<double>;
};

struct NullObserver {
    void start(const NonlocalEngine&, const Field&) {}
    void advance(const StepContext&) {}
    double min_slope() const { return 0.0; }
};

// First breakdown indication: the more negative of the grid slope and the observer channel.
inline std::optional<Breakdown> detect_breakdown(const StepDiagnostics& d, double channel_slope,
                                                 double threshold, std::size_t step) {
    const bool channel_first = channel_slope < d.min_ux;
    const double slope = channel_first ? channel_slope : d.min_ux;
    if (slope < -threshold) return Breakdown{d.t, slope, channel_first ? "characteristic" : "grid", step};
    return std::nullopt;
}

inline std::optional<Breakdown> detect_breakdown(const Trajectory& traj, double threshold) {
    for (std::size_t i = 0; i < traj.diagnostics.size(); ++i)
        if (auto b = detect_breakdown(traj.diagnostics[i], 0.0, threshold, i)) return b;
    return std::nullopt;
}

namespace detail {

inline StepDiagnostics diagnose(const NonlocalEngine& e, const Field& u, const Field& ux, double t) {
    const auto c = conserved_quantities(e, u);
    return {t, c.E1, c.E2, c.E3, u.max_abs(), ux.min(), ux.max()};
}

}  // namespace detail

template <StepObserver O>
Trajectory evolve(const NonlocalEngine& e, const Field& u0, const SolverConfig& cfg, O& observer) {
    cfg.validate();
    require_same_grid(u0.grid(), e.grid(), "evolve");
    std::vector<double> marks = cfg.output_times;
    std::erase_if(marks, [&](double t) { return !(t > 0.0 && t < cfg.end_time); });
    std::sort(marks.begin(), marks.end());
    marks.push_back(cfg.end_time);
    std::size_t next_mark = 0;

    Trajectory traj;
    Field u = u0;
    Field ux = derivative(u);
    double t = 0.0;
    traj.times.push_back(t);
    traj.snapshots.push_back(u);
    traj.derivative_snapshots.push_back(ux);
    traj.diagnostics.push_back(detail::diagnose(e, u, ux, t));
    observer.start(e, u);

    for (std::size_t n = 1;; ++n) {
        double dt = stable_dt(u, cfg.cfl);
        bool on_mark = false;
        if (t + dt >= marks[next_mark]) {
            dt = marks[next_mark] - t;
            on_mark = true;
        }
        if (!(dt > 1e-14 * cfg.end_time))
            throw NumericalError("time step collapsed to " + format_double(dt), static_cast<std::ptrdiff_t>(n));
        std::optional<StageFields> s;
        try {
            s.emplace(step_stages(e, u, dt, cfg));
        } catch (const NumericalError& err) {
            throw NumericalError(err.what(), static_cast<std::ptrdiff_t>(n));
        }
        observer.advance(StepContext{n, t, dt, u, s->stage1, s->stage2, s->next, e});
        t = on_mark ? marks[next_mark] : t + dt;
        u = s->next;
        ux = derivative(u);
        traj.steps = n;
        const auto diag = detail::diagnose(e, u, ux, t);
        traj.diagnostics.push_back(diag);

        const auto br = detect_breakdown(diag, observer.min_slope(), cfg.blowup_threshold, n);
        const bool done = br.has_value() || (on_mark && next_mark + 1 == marks.size());
        if (on_mark || done || n % cfg.snapshot_stride == 0) {
            traj.times.push_back(t);
            traj.snapshots.push_back(u);
            traj.derivative_snapshots.push_back(ux);
        }
        if (on_mark) ++next_mark;
        if (br) traj.breakdown = br;
        if (done) break;
    }
    return traj;
}

inline Trajectory evolve(const NonlocalEngine& e, const Field& u0, const SolverConfig& cfg) {
    NullObserver none;
    return evolve(e, u0, cfg, none);
}

}  // namespace fwlab
