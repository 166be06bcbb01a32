#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fwlab/grid.hpp"
#include "fwlab/initial_data.hpp"
#include "fwlab/nonlocal.hpp"
#include "fwlab/solver.hpp"

namespace fwlab {

enum class SeedKind { interior, proxy, kink, exterior, custom };

struct Seed {
    double x0;
    SeedKind kind;
    std::string label;
};

struct SeedLayout {
    std::size_t interior = 64;
    std::size_t exterior = 16;
    double exterior_extent = 8.0;  // exterior seeds fill (q0, extent * q0)
    double proxy_offset = 1e-3;    // q0^- proxy at q0 (1 - offset)
};

inline std::string indexed(const char* prefix, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%02zu", prefix, i);
    return buf;
}

// Midpoint-rule interior seeds, the q0^- proxy, the two window endpoints and the exterior seeds,
// sorted by position.
inline std::vector<Seed> peakon_pair_seeds(double q0, const SeedLayout& lay = {}) {
    std::vector<Seed> out;
    const double w = 2.0 * q0 / static_cast<double>(lay.interior);
    for (std::size_t i = 0; i < lay.interior; ++i)
        out.push_back({-q0 + (static_cast<double>(i) + 0.5) * w, SeedKind::interior, indexed("in", i)});
    out.push_back({q0 * (1.0 - lay.proxy_offset), SeedKind::proxy, "q0-"});
    out.push_back({-q0, SeedKind::kink, "kink-"});
    out.push_back({q0, SeedKind::kink, "kink+"});
    const double we = (lay.exterior_extent - 1.0) * q0 / static_cast<double>(lay.exterior);
    for (std::size_t i = 0; i < lay.exterior; ++i) {
        const double d = q0 + (static_cast<double>(i) + 0.5) * we;
        out.push_back({d, SeedKind::exterior, indexed("ex+", i)});
        out.push_back({-d, SeedKind::exterior, indexed("ex-", i)});
    }
    std::sort(out.begin(), out.end(), [](const Seed& a, const Seed& b) { return a.x0 < b.x0; });
    return out;
}

// Per-seed state of the flow at one stored time.
struct FlowSample {
    double t;
    std::vector<double> psi;
    std::vector<double> slope_interp;  // interpolated grid derivative at psi
    std::vector<double> slope_ode;     // Riccati channel d/dt s = -(3/2) s^2 + V(psi)
    std::vector<double> v_value;       // V(t, psi)
    std::vector<double> u_interp;      // interpolated u at psi
    std::vector<double> u_lagrangian;  // u0(x0) + int_0^t source(psi) dtau
    std::vector<double> log_jacobian;  // log d psi / d x0 from (log J)' = (3/2) s
};

// Characteristics psi(t, x0) advanced in lockstep with the solver's SSP-RK3 stages.
class CharacteristicBundle {
public:
    using SlopeInit = std::function<double(const Seed&)>;

    explicit CharacteristicBundle(std::vector<Seed> seeds, SlopeInit initial_slope = {})
        : seeds_(std::move(seeds)), initial_slope_(std::move(initial_slope)) {
        if (seeds_.empty()) throw ConfigError("characteristic bundle needs at least one seed");
        for (std::size_t i = 1; i < seeds_.size(); ++i)
            if (!(seeds_[i - 1].x0 < seeds_[i].x0)) throw ConfigError("seeds must be strictly increasing");
    }

    const std::vector<Seed>& seeds() const noexcept { return seeds_; }
    const std::vector<FlowSample>& samples() const noexcept { return samples_; }
    const FlowSample& latest() const { return samples_.back(); }

    std::optional<std::size_t> find_time(double t, double tol = 1e-12) const {
        for (std::size_t k = 0; k < samples_.size(); ++k)
            if (std::abs(samples_[k].t - t) <= tol * std::max(1.0, std::abs(t))) return k;
        return std::nullopt;
    }

    void start(const NonlocalEngine& e, const Field& u0) {
        samples_.clear();
        const Field ux = derivative(u0);
        pair_ = e.smooth_and_source(u0);
        const std::size_t n = seeds_.size();
        FlowSample s{0.0, std::vector<double>(n), {}, std::vector<double>(n), {}, {}, {},
                     std::vector<double>(n, 0.0)};
        initial_u_.resize(n);
        source_integral_.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            s.psi[i] = seeds_[i].x0;
            initial_u_[i] = interpolate(u0, seeds_[i].x0);
            s.slope_ode[i] = initial_slope_ ? initial_slope_(seeds_[i]) : interpolate(ux, seeds_[i].x0);
        }
        fill_eulerian(s, u0, ux, pair_);
        samples_.push_back(std::move(s));
    }

    void advance(const StepContext& c) {
        const FlowSample& prev = samples_.back();
        const std::size_t n = seeds_.size();
        const double dt = c.dt;
        const Grid& g = c.u.grid();

        // Flow map: the same Shu-Osher combination as the solver, velocity (3/2) u at each stage.
        std::vector<double> p1(n), p2(n), pn(n);
        for (std::size_t i = 0; i < n; ++i) p1[i] = prev.psi[i] + dt * 1.5 * interpolate(c.u, prev.psi[i]);
        check_range(p1, g, c.step);
        for (std::size_t i = 0; i < n; ++i)
            p2[i] = 0.75 * prev.psi[i] + 0.25 * (p1[i] + dt * 1.5 * interpolate(c.stage1, p1[i]));
        check_range(p2, g, c.step);
        for (std::size_t i = 0; i < n; ++i)
            pn[i] = prev.psi[i] / 3.0 + 2.0 / 3.0 * (p2[i] + dt * 1.5 * interpolate(c.stage2, p2[i]));
        check_range(pn, g, c.step);

        // Forcing at t, t + dt/2 and t + dt along the path.
        const SmoothedPair mid = c.engine.smooth_and_source(c.stage2);
        SmoothedPair end = c.engine.smooth_and_source(c.next);
        const Field ux = derivative(c.next);

        FlowSample s{prev.t + dt, pn, {}, prev.slope_ode, {}, {}, {}, prev.log_jacobian};
        for (std::size_t i = 0; i < n; ++i) {
            const double va = interpolate(pair_.smooth, prev.psi[i]) - interpolate(c.u, prev.psi[i]);
            const double vm = interpolate(mid.smooth, p2[i]) - interpolate(c.stage2, p2[i]);
            const double vb = interpolate(end.smooth, pn[i]) - interpolate(c.next, pn[i]);
            integrate_riccati(s.slope_ode[i], s.log_jacobian[i], va, vm, vb, dt);
            const double sa = interpolate(pair_.source, prev.psi[i]);
            const double sm = interpolate(mid.source, p2[i]);
            const double sb = interpolate(end.source, pn[i]);
            source_integral_[i] += dt * (sa + 4.0 * sm + sb) / 6.0;
        }
        fill_eulerian(s, c.next, ux, end);
        pair_ = std::move(end);
        samples_.push_back(std::move(s));
    }

    // Most negative Riccati-channel slope over interior seeds and the q0^- proxy.
    double min_slope() const {
        double m = 0.0;
        const auto& s = samples_.back();
        for (std::size_t i = 0; i < seeds_.size(); ++i)
            if (seeds_[i].kind == SeedKind::interior || seeds_[i].kind == SeedKind::proxy)
                m = std::min(m, s.slope_ode[i]);
        return m;
    }

    std::size_t index_of(const std::string& label) const {
        for (std::size_t i = 0; i < seeds_.size(); ++i)
            if (seeds_[i].label == label) return i;
        throw ConfigError("no seed labelled " + label);
    }

private:
    static void check_range(const std::vector<double>& p, const Grid& g, std::size_t step) {
        const double lo = -g.half_width() + 2.0 * g.spacing();
        const double hi = g.half_width() - 2.0 * g.spacing();
        for (double x : p)
            if (!(x >= lo && x <= hi))
                throw NumericalError("characteristic left the grid interior at x = " + format_double(x),
                                     static_cast<std::ptrdiff_t>(step));
    }

    void fill_eulerian(FlowSample& s, const Field& u, const Field& ux, const SmoothedPair& pair) const {
        const std::size_t n = seeds_.size();
        s.slope_interp.resize(n);
        s.v_value.resize(n);
        s.u_interp.resize(n);
        s.u_lagrangian.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            s.slope_interp[i] = interpolate(ux, s.psi[i]);
            s.u_interp[i] = interpolate(u, s.psi[i]);
            s.v_value[i] = interpolate(pair.smooth, s.psi[i]) - s.u_interp[i];
            s.u_lagrangian[i] = initial_u_[i] + source_integral_[i];
        }
    }

    // RK4 on s' = -(3/2) s^2 + V(theta), (log J)' = (3/2) s over one solver step, with V quadratic
    // in theta through the three stage values. Substeps keep (3/2)|s| * tau below 0.02.
    static void integrate_riccati(double& s, double& logj, double va, double vm, double vb, double dt) {
        constexpr double runaway = 1e12;
        if (!(std::abs(s) < runaway)) return;
        const double c1 = -3.0 * va + 4.0 * vm - vb;
        const double c2 = 2.0 * va - 4.0 * vm + 2.0 * vb;
        auto V = [&](double tau) {
            const double th = tau / dt;
            return va + th * (c1 + th * c2);
        };
        auto f = [&](double tau, double y) { return -1.5 * y * y + V(tau); };
        double tau = 0.0;
        while (tau < dt) {
            double h = std::min(dt - tau, 0.02 / (1.5 * std::abs(s) + 1e-300));
            if (dt - tau - h < 1e-12 * dt) h = dt - tau;
            const double k1 = f(tau, s);
            const double k2 = f(tau + 0.5 * h, s + 0.5 * h * k1);
            const double k3 = f(tau + 0.5 * h, s + 0.5 * h * k2);
            const double k4 = f(tau + h, s + h * k3);
            const double j = 1.5 * (s + (s + 0.5 * h * k1) * 2.0 + (s + 0.5 * h * k2) * 2.0 + (s + h * k3)) / 6.0;
            logj += h * j;
            s += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
            tau += h;
            if (!(std::abs(s) < runaway)) {
                s = -runaway;
                return;
            }
        }
    }

    std::vector<Seed> seeds_;
    SlopeInit initial_slope_;
    std::vector<FlowSample> samples_;
    std::vector<double> initial_u_;
    std::vector<double> source_integral_;
    SmoothedPair pair_{Field::zeros(Grid(1.0, 16)), Field::zeros(Grid(1.0, 16))};
};

static_assert(StepObserver<CharacteristicBundle>);

// Closed-form u0' at each seed; the window endpoints take their interior one-sided value.
inline CharacteristicBundle::SlopeInit peakon_pair_slopes(const PeakonPairParams& a) {
    return [a](const Seed& s) {
        if (s.kind == SeedKind::kink) return u0_prime_eval(a, s.x0, s.x0 > 0 ? Side::left : Side::right);
        return u0_prime_eval(a, s.x0);
    };
}

inline CharacteristicBundle make_pair_bundle(const PeakonPairParams& a, const SeedLayout& lay = {}) {
    return CharacteristicBundle(peakon_pair_seeds(a.q0, lay), peakon_pair_slopes(a));
}

// Seed position x0 whose characteristic sits at z, by monotone linear interpolation of the seed map.
inline double inverse_flow(const CharacteristicBundle& b, std::size_t k, double z) {
    const auto& psi = b.samples().at(k).psi;
    const auto& seeds = b.seeds();
    if (z < psi.front() || z > psi.back()) throw ConfigError("inverse_flow: point outside the seeded range");
    const auto it = std::upper_bound(psi.begin(), psi.end(), z);
    if (it == psi.end()) return seeds.back().x0;
    const auto i = static_cast<std::size_t>(it - psi.begin());
    if (i == 0) return seeds.front().x0;
    const double w = (z - psi[i - 1]) / (psi[i] - psi[i - 1]);
    return (1.0 - w) * seeds[i - 1].x0 + w * seeds[i].x0;
}

inline bool order_preserved(const FlowSample& s) {
    for (std::size_t i = 1; i < s.psi.size(); ++i)
        if (!(s.psi[i - 1] < s.psi[i])) return false;
    return true;
}

// Residual |u(t, psi) - (u0(x0) + int source)| per seed.
inline std::vector<double> u_along_residual(const FlowSample& s) {
    std::vector<double> r(s.psi.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::abs(s.u_interp[i] - s.u_lagrangian[i]);
    return r;
}

// int_{-q0}^{q0} |s|^p J dx0 by the midpoint rule on the interior seeds (the Lagrangian form of
// int over (psi(t,-q0), psi(t,q0)) of |u_x|^p).
inline double lagrangian_window_power(const CharacteristicBundle& b, std::size_t k, double p, double q0) {
    const auto& s = b.samples().at(k);
    std::size_t count = 0;
    double acc = 0.0;
    for (std::size_t i = 0; i < b.seeds().size(); ++i) {
        if (b.seeds()[i].kind != SeedKind::interior) continue;
        acc += std::pow(std::abs(s.slope_ode[i]), p) * std::exp(s.log_jacobian[i]);
        ++count;
    }
    if (count == 0) throw ConfigError("bundle has no interior seeds");
    return acc * 2.0 * q0 / static_cast<double>(count);
}

}  // namespace fwlab
