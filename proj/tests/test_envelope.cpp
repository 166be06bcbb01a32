#include <cmath>

#include <gtest/gtest.h>

#include "fwlab/envelope.hpp"

using namespace fwlab;

namespace {

PeakonPairParams reference() { return {10.0, 0.01, Regime{1.2, 2.0, 2.0}, 0.5}; }

double rel(double a, double b) { return std::abs(a / b - 1.0); }

}  // namespace

TEST(Lifespan, ReferenceValues) {
    // Oracles: closed forms evaluated in mpmath.
    const auto ls = lifespan_bracket(reference());
    EXPECT_LT(rel(ls.t_min, 0.0334974932708093), 1e-13);
    EXPECT_LT(rel(ls.t_max, 0.0338375350516170), 1e-13);
    EXPECT_NEAR(ls.t_min, 0.033500, 5e-6);
}

TEST(Lifespan, OrderedForAllQ0) {
    for (double q = 0.001; q < 1.0; q += 0.007) {
        const auto ls = lifespan_bracket({5.0, q, Regime{}, 0.5});
        EXPECT_LT(ls.t_min, ls.t_max) << q;
    }
}

TEST(Lifespan, InsideOpenIntervalForSmallQ0) {
    for (double p0 : {1.0, 10.0, 160.0})
        for (double q : {0.0005, 0.005, 0.02, 0.05}) {
            const auto ls = lifespan_bracket({p0, q, Regime{}, 0.5});
            EXPECT_GT(ls.t_min, 1.0 / (3.0 * p0));
            EXPECT_LT(ls.t_max, 2.0 / (3.0 * p0));
        }
}

TEST(Envelopes, ReferenceValuesAtHalfTmin) {
    const auto a = reference();
    const double t = 0.5 * lifespan_bracket(a).t_min;
    EXPECT_LT(rel(m_envelope(a, t), -39.8039734661351), 1e-12);
    EXPECT_LT(rel(M_envelope(a, t), -39.0080512480424), 1e-12);
}

TEST(Envelopes, RiccatiEnvelopeReferencePoint) {
    const auto e = riccati_envelope(reference(), 0.005, 0.01);
    EXPECT_LT(rel(e.lower, -28.2703117005844), 1e-12);
    EXPECT_LT(rel(e.upper, -28.0656012844891), 1e-12);
}

TEST(Envelopes, CoincideWithSlopeAtTimeZero) {
    const auto a = reference();
    for (double x : {-0.009, -0.002, 0.0, 0.0045}) {
        const auto e = riccati_envelope(a, x, 0.0);
        EXPECT_NEAR(e.lower, u0_prime_eval(a, x), 1e-12);
        EXPECT_NEAR(e.upper, u0_prime_eval(a, x), 1e-12);
    }
    EXPECT_THROW(riccati_envelope(a, 0.5, 0.0), ConfigError);
}

TEST(Envelopes, DecreaseOnTheLifespan) {
    const auto a = reference();
    const double tm = lifespan_bracket(a).t_min;
    double pm = m_envelope(a, 0.0), pM = M_envelope(a, 0.0);
    for (int k = 1; k < 200; ++k) {
        const double t = tm * k / 200.0;
        EXPECT_LT(m_envelope(a, t), pm);
        EXPECT_LT(M_envelope(a, t), pM);
        EXPECT_LE(m_envelope(a, t), M_envelope(a, t));
        pm = m_envelope(a, t);
        pM = M_envelope(a, t);
    }
}

TEST(EnergyBound, StartsAtA0) {
    const auto a = reference();
    EXPECT_DOUBLE_EQ(exp_B(a, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(int_exp_minus_B(a, 0.0), 0.0);
    EXPECT_NEAR(energy_lower_bound(a, 0.0), a0_exact(a), 1e-12);
}

TEST(EnergyBound, AgainstDirectQuadratureOfB) {
    // Oracle: B(t) = int_0^t (-(3/2) M - 1) and int exp(-B) by nested mpmath quadrature.
    const auto a = reference();
    const double tm = lifespan_bracket(a).t_min;
    EXPECT_LT(rel(int_exp_minus_B(a, 0.5 * tm), 0.0126983197186050), 1e-11);
    EXPECT_LT(rel(int_exp_minus_B(a, 0.9 * tm), 0.0169043232582321), 1e-11);
    EXPECT_LT(rel(energy_lower_bound(a, 0.5 * tm), 15.2650491608806), 1e-11);
    EXPECT_LT(rel(energy_lower_bound(a, 0.9 * tm), 69.7259466484218), 1e-11);
    EXPECT_THROW(energy_lower_bound(a, 1.01 * tm), ConfigError);
}

TEST(EnergyBound, AsymptoticsAtReference) {
    const auto a = reference();
    const auto e = energy_asymptotics(a);
    EXPECT_LT(rel(e.m_ratio, 99.0197571102292), 1e-11);
    EXPECT_GT(e.m_ratio, 0.5 / a.q0);
    EXPECT_LT(e.m_ratio, 2.0 / a.q0);
    EXPECT_GT(e.lower_at_t_min, 0.0);
    EXPECT_LT(e.p0_int_exp_minus_B, 1.0);
}
