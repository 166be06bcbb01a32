#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "fwlab/error.hpp"
#include "fwlab/grid.hpp"

namespace fwlab {

// Besov triple (s, p, r); p and r may be +infinity.
struct Regime {
    double s = 1.0;
    double p = 2.0;
    double r = 2.0;
};

// Admissible set: 1 < s < 1 + 1/p with p in [2, inf), r in [1, inf];
// or s = 1 with p in [2, inf), r in [1, 2].
inline bool validate_regime(double s, double p, double r) {
    if (std::isnan(s) || std::isnan(p) || std::isnan(r)) return false;
    if (!(p >= 2.0) || std::isinf(p) || !(r >= 1.0)) return false;
    if (s > 1.0 && s < 1.0 + 1.0 / p) return true;
    return s == 1.0 && r <= 2.0;
}

inline bool validate_regime(const Regime& g) { return validate_regime(g.s, g.p, g.r); }

inline std::string regime_rule() {
    return "admissible regimes: 1 < s < 1 + 1/p with p in [2, inf) and r in [1, inf], "
           "or s = 1 with p in [2, inf) and r in [1, 2]";
}

struct PeakonPairParams {
    double p0 = 10.0;
    double q0 = 0.01;
    Regime regime{};
    double delta = 0.5;

    void validate() const {
        if (!(p0 > 0.0) || !std::isfinite(p0)) throw ConfigError("p0 must be positive");
        if (!(q0 > 0.0 && q0 < 1.0)) throw ConfigError("q0 must lie in (0, 1)");
        if (!(delta > 0.0)) throw ConfigError("delta must be positive");
        if (!validate_regime(regime))
            throw ConfigError("regime (s=" + format_double(regime.s) + ", p=" + format_double(regime.p) +
                              ", r=" + format_double(regime.r) + ") rejected; " + regime_rule());
    }
};

inline double u0_eval(const PeakonPairParams& a, double x) {
    return a.p0 * (std::exp(-std::abs(x + a.q0)) - std::exp(-std::abs(x - a.q0)));
}

enum class Side { none, left, right };

// Closed-form derivative; at x = +-q0 the one-sided value must be requested explicitly.
inline double u0_prime_eval(const PeakonPairParams& a, double x, Side side = Side::none) {
    const double q = a.q0;
    const bool at_kink = (x == q || x == -q);
    if (at_kink && side == Side::none)
        throw ConfigError("u0' is two-valued at x = +-q0; pass Side::left or Side::right");
    bool inside = std::abs(x) < q;
    if (at_kink) inside = (x == q) ? side == Side::left : side == Side::right;
    if (inside) return -a.p0 * std::exp(-q) * (std::exp(x) + std::exp(-x));
    return a.p0 * std::exp(-std::abs(x)) * (std::exp(q) - std::exp(-q));
}

inline Field sample_u0(const PeakonPairParams& a, const Grid& g) {
    return sample([&](double x) { return u0_eval(a, x); }, g);
}

struct SupBounds {
    double linf;
    double l2;
};

inline SupBounds u0_sup_bounds(const PeakonPairParams& a) { return {2.0 * a.p0 * a.q0, 4.0 * a.p0 * a.q0}; }

inline double u0_linf_exact(const PeakonPairParams& a) { return a.p0 * (1.0 - std::exp(-2.0 * a.q0)); }

inline double u0_l2_exact(const PeakonPairParams& a) {
    return a.p0 * std::sqrt(2.0 - 2.0 * std::exp(-2.0 * a.q0) * (1.0 + 2.0 * a.q0));
}

// A0 = int_{|x| <= q0} (u0')^2.
inline double a0_exact(const PeakonPairParams& a) {
    const double q = a.q0;
    return a.p0 * a.p0 * std::exp(-2.0 * q) * (2.0 * std::sinh(2.0 * q) + 4.0 * q);
}

// Exact H^sigma norm from the transform 4 i p0 sin(xi q0) / (1 + xi^2):
// ||u0||^2 = (8 p0^2 / pi) [ sqrt(pi) Gamma(nu) / (2 Gamma(a)) - sqrt(pi) q0^nu K_nu(2 q0) / Gamma(a) ],
// with a = 2 - sigma and nu = 3/2 - sigma.
inline double hs_norm_exact(double p0, double q0, double sigma) {
    if (!(sigma > 0.5 && sigma < 1.5)) throw ConfigError("sigma must lie in (1/2, 3/2)");
    const double a = 2.0 - sigma;
    const double nu = 1.5 - sigma;
    const double sp = std::sqrt(std::numbers::pi);
    const double far = sp * std::tgamma(nu) / (2.0 * std::tgamma(a));
    const double near = sp * std::pow(q0, nu) * std::cyl_bessel_k(nu, 2.0 * q0) / std::tgamma(a);
    return p0 * std::sqrt(8.0 / std::numbers::pi * (far - near));
}

inline double hs_scaling_model(double p0, double q0, double sigma) { return p0 * std::pow(q0, 1.5 - sigma); }

// Constant C with C^{-1} <= ||u0||_{H^sigma} / (p0 q0^{3/2 - sigma}) <= C, fixed at (p0, q0) = (1, 0.1)
// with a factor of two of slack.
inline double calibrate_hs_constant(double sigma) {
    const double ratio = hs_norm_exact(1.0, 0.1, sigma) / hs_scaling_model(1.0, 0.1, sigma);
    return 2.0 * std::max(ratio, 1.0 / ratio);
}

struct Bracket {
    double lower;
    double upper;
    bool contains(double v) const noexcept { return v >= lower && v <= upper; }
};

inline Bracket hs_norm_bracket(const PeakonPairParams& a, double sigma, double constant) {
    if (!(sigma > 0.5 && sigma < 1.5)) throw ConfigError("sigma must lie in (1/2, 3/2)");
    const double base = hs_scaling_model(a.p0, a.q0, sigma);
    return {base / constant, base * constant};
}

inline Bracket hs_norm_bracket(const PeakonPairParams& a, double sigma) {
    return hs_norm_bracket(a, sigma, calibrate_hs_constant(sigma));
}

// Travelling peak of the equation as implemented (right-hand side +d/dx (1 - d^2)^{-1} u):
// u(t, x) = -(8/9) exp(-|x + 4t/3| / 2), moving left with speed 4/3. Distances are taken periodically.
inline constexpr double peakon_speed = -4.0 / 3.0;

inline double peakon_profile(double x, double t, double period = infinity) {
    double d = x - peakon_speed * t;
    if (std::isfinite(period)) d -= period * std::round(d / period);
    return -(8.0 / 9.0) * std::exp(-0.5 * std::abs(d));
}

inline Field sample_peakon(const Grid& g, double t) {
    return sample([&](double x) { return peakon_profile(x, t, g.period()); }, g);
}

}  // namespace fwlab
