#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "fwlab/characteristics.hpp"
#include "fwlab/grid.hpp"
#include "fwlab/initial_data.hpp"
#include "fwlab/solver.hpp"

namespace fwlab {

struct Lifespan {
    double t_min;
    double t_max;
};

inline Lifespan lifespan_bracket(const PeakonPairParams& a) {
    const double e = std::exp(-2.0 * a.q0);
    return {(2.0 / 3.0) / (a.p0 * (1.0 + e + a.q0)), (2.0 / 3.0) / (a.p0 * (1.0 + e - a.q0))};
}

inline double m_envelope(const PeakonPairParams& a, double t) {
    const double s0 = u0_prime_eval(a, a.q0, Side::left) - a.p0 * a.q0;
    return 1.0 / (1.5 * t + 1.0 / s0);
}

inline double M_envelope(const PeakonPairParams& a, double t) {
    const double s0 = u0_prime_eval(a, 0.0) + a.p0 * a.q0;
    return 1.0 / (1.5 * t + 1.0 / s0);
}

struct Envelope {
    double lower;
    double upper;
};

// Riccati comparison envelopes for the slope along the characteristic from x0:
// lower = 1/((3/2) t + 1/(u0'(x0) - p0 q0)) + p0 q0, upper = 1/((3/2) t + 1/(u0'(x0) + p0 q0)) - p0 q0.
inline Envelope riccati_envelope(const PeakonPairParams& a, double x0, double t, Side side = Side::none) {
    if (!(std::abs(x0) < a.q0) && side == Side::none)
        throw ConfigError("riccati_envelope needs an interior position |x0| < q0");
    const double d = u0_prime_eval(a, x0, side);
    const double pq = a.p0 * a.q0;
    const double upper_blowup = (2.0 / 3.0) * (-1.0 / (d + pq));
    if (!(t < upper_blowup))
        throw ConfigError("t = " + format_double(t) + " is beyond the upper branch blowup time " +
                          format_double(upper_blowup));
    const double lower_blowup = (2.0 / 3.0) * (-1.0 / (d - pq));
    const double lower = t < lower_blowup ? 1.0 / (1.5 * t + 1.0 / (d - pq)) + pq : -infinity;
    return {lower, 1.0 / (1.5 * t + 1.0 / (d + pq)) - pq};
}

enum class SlopeChannel { characteristic, grid };

inline std::string_view to_string(SlopeChannel c) {
    return c == SlopeChannel::characteristic ? "characteristic" : "grid";
}

struct Verdict {
    double t;
    std::size_t seed;
    double slope;
    double lower;
    double upper;
    bool pass;
};

struct VerdictTable {
    SlopeChannel channel;
    std::vector<Verdict> rows;

    std::size_t passed() const {
        std::size_t k = 0;
        for (const auto& r : rows) k += r.pass ? 1 : 0;
        return k;
    }
    double pass_rate() const { return rows.empty() ? 1.0 : static_cast<double>(passed()) / rows.size(); }
};

inline const std::vector<double>& channel_values(const FlowSample& s, SlopeChannel c) {
    return c == SlopeChannel::characteristic ? s.slope_ode : s.slope_interp;
}

// Sandwich m(t) + p0 q0 - tol <= u_x(t, psi) <= M(t) - p0 q0 + tol, tol = rel_tol |m(t)|, over
// interior seeds and the q0^- proxy at every stored time t <= t_limit.
inline VerdictTable check_sandwich(const CharacteristicBundle& b, const PeakonPairParams& a, double t_limit,
                                   SlopeChannel channel = SlopeChannel::characteristic, double rel_tol = 0.05) {
    VerdictTable out{channel, {}};
    const double pq = a.p0 * a.q0;
    for (const auto& s : b.samples()) {
        if (s.t > t_limit * (1.0 + 1e-12)) break;
        const double m = m_envelope(a, s.t);
        const double tol = rel_tol * std::abs(m);
        const double lo = m + pq - tol;
        const double hi = M_envelope(a, s.t) - pq + tol;
        const auto& v = channel_values(s, channel);
        for (std::size_t i = 0; i < b.seeds().size(); ++i) {
            const auto kind = b.seeds()[i].kind;
            if (kind != SeedKind::interior && kind != SeedKind::proxy) continue;
            out.rows.push_back({s.t, i, v[i], lo, hi, v[i] >= lo && v[i] <= hi});
        }
    }
    return out;
}

// Exterior claim |u_x(t, psi(t, x0))| <= 6 p0 q0 for |x0| > q0, with relative slack.
inline VerdictTable check_exterior(const CharacteristicBundle& b, const PeakonPairParams& a, double t_limit,
                                   SlopeChannel channel, double slack = 0.10) {
    VerdictTable out{channel, {}};
    const double bound = 6.0 * a.p0 * a.q0 * (1.0 + slack);
    for (const auto& s : b.samples()) {
        if (s.t > t_limit * (1.0 + 1e-12)) break;
        const auto& v = channel_values(s, channel);
        for (std::size_t i = 0; i < b.seeds().size(); ++i) {
            if (b.seeds()[i].kind != SeedKind::exterior) continue;
            out.rows.push_back({s.t, i, v[i], -bound, bound, std::abs(v[i]) <= bound});
        }
    }
    return out;
}

struct Window {
    double left;
    double right;
};

inline Window window_at(const CharacteristicBundle& b, std::size_t k) {
    const auto& s = b.samples().at(k);
    return {s.psi[b.index_of("kink-")], s.psi[b.index_of("kink+")]};
}

// A(t) = int_{psi(t,-q0)}^{psi(t,q0)} u_x^2 from the stored derivative snapshot.
inline double energy_A(const Trajectory& traj, const CharacteristicBundle& b, double t) {
    const auto ti = traj.find_time(t);
    const auto bi = b.find_time(t);
    if (!ti || !bi) throw ConfigError("energy_A: time " + format_double(t) + " is not stored");
    const Window w = window_at(b, *bi);
    if (!(w.left < w.right)) throw NumericalError("energy_A: degenerate window");
    const Field sq = map(traj.derivative_snapshots[*ti], [](double v) { return v * v; });
    return integrate_window(sq, w.left, w.right);
}

inline double energy_A_lagrangian(const CharacteristicBundle& b, double t, double q0) {
    const auto bi = b.find_time(t);
    if (!bi) throw ConfigError("energy_A_lagrangian: time " + format_double(t) + " is not stored");
    return lagrangian_window_power(b, *bi, 2.0, q0);
}

// Derived constant of the A(t) inequality: ||V||_{L2}^2 <= ||u0||_{L2}^2 <= 16 p0^2 q0^2.
inline constexpr double energy_constant = 16.0;

// exp(B(t)) = (M(t)/M(0)) e^{-t}.
inline double exp_B(const PeakonPairParams& a, double t) {
    return M_envelope(a, t) / M_envelope(a, 0.0) * std::exp(-t);
}

// int_0^t exp(-B) = (e^t - 1) + (3/2) M(0) ((t - 1) e^t + 1).
inline double int_exp_minus_B(const PeakonPairParams& a, double t) {
    const double m0 = M_envelope(a, 0.0);
    return std::expm1(t) + 1.5 * m0 * ((t - 1.0) * std::exp(t) + 1.0);
}

inline double energy_lower_bound(const PeakonPairParams& a, double t, double constant = energy_constant) {
    if (t < 0.0 || t > lifespan_bracket(a).t_min * (1.0 + 1e-12))
        throw ConfigError("energy_lower_bound needs 0 <= t <= T_min");
    const double pq = a.p0 * a.q0;
    return exp_B(a, t) * (a0_exact(a) - constant * pq * pq * int_exp_minus_B(a, t));
}

struct EnergyAsymptotics {
    double m_ratio;            // M(T_min)/M(0), expected ~ 1/q0
    double p0_int_exp_minus_B;  // p0 * int_0^{T_min} exp(-B), expected O(1)
    double lower_at_t_min;      // energy_lower_bound(T_min)
    double lower_over_p0_sq;    // lower_at_t_min / (p0^2 - p0 q0)
};

inline EnergyAsymptotics energy_asymptotics(const PeakonPairParams& a) {
    const double tm = lifespan_bracket(a).t_min;
    const double low = energy_lower_bound(a, tm);
    return {M_envelope(a, tm) / M_envelope(a, 0.0), a.p0 * int_exp_minus_B(a, tm), low,
            low / (a.p0 * a.p0 - a.p0 * a.q0)};
}

struct Certificate {
    double t0;
    double p;
    double window_grid;         // (int_window |u_x|^p)^{1/p} on the grid
    double window_lagrangian;   // same quantity along characteristics
    double w1p_grid;            // ||u||_p + ||u_x||_p on the grid
    double w1p_composite;       // grid outside the window, Lagrangian inside
    double threshold;           // c sqrt(p0)
    bool pass;
};

inline Certificate inflation_certificate(const Trajectory& traj, const CharacteristicBundle& b,
                                         const PeakonPairParams& a, double t0, double p, double c) {
    require_exponent(p, "certificate exponent");
    const auto ti = traj.find_time(t0);
    const auto bi = b.find_time(t0);
    if (!ti || !bi) throw ConfigError("inflation_certificate: time " + format_double(t0) + " is not stored");
    const Field& u = traj.snapshots[*ti];
    const Field& ux = traj.derivative_snapshots[*ti];
    const Window w = window_at(b, *bi);
    const Field pw = map(ux, [p](double v) { return std::pow(std::abs(v), p); });
    const double inside_grid = w.left < w.right ? integrate_window(pw, w.left, w.right) : 0.0;
    double total_grid = 0.0;
    for (double v : pw.values()) total_grid += v;
    total_grid *= ux.grid().spacing();
    const double outside = std::max(0.0, total_grid - inside_grid);
    const double inside_lagr = lagrangian_window_power(b, *bi, p, a.q0);

    Certificate cert{};
    cert.t0 = t0;
    cert.p = p;
    cert.window_grid = std::pow(inside_grid, 1.0 / p);
    cert.window_lagrangian = std::pow(inside_lagr, 1.0 / p);
    cert.w1p_grid = lp_norm(u, p) + lp_norm(ux, p);
    cert.w1p_composite = lp_norm(u, p) + std::pow(inside_lagr + outside, 1.0 / p);
    cert.threshold = c * std::sqrt(a.p0);
    cert.pass = cert.window_lagrangian > 0.0 && cert.window_lagrangian >= cert.threshold;
    return cert;
}

}  // namespace fwlab
