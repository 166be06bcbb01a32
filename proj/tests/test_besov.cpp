#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fwlab/besov.hpp"
#include "fwlab/initial_data.hpp"

using namespace fwlab;

TEST(Partition, SumsToOne) {
    const DyadicPartition part(Grid(40.0, 1 << 14));
    EXPECT_LE(part.unity_residual(), 1e-12);
    // Nyquist pi N / (2L) = 643.4; lp_inner 2^J = 0.530 2^J must reach it.
    EXPECT_EQ(part.annuli(), 11u);
    EXPECT_EQ(part.block_count(), 12u);
    EXPECT_EQ(part.level(0), -1);
}

TEST(Partition, BlocksLiveOnAnnuli) {
    const Grid g(40.0, 1 << 12);
    const DyadicPartition part(g);
    for (std::size_t b = 1; b < part.block_count(); ++b) {
        const double lo = lp_inner * std::ldexp(1.0, part.level(b));
        const double hi = 2.0 * lp_outer * std::ldexp(1.0, part.level(b));
        EXPECT_LT(lo, std::ldexp(1.0, part.level(b)));
        EXPECT_GT(hi, std::ldexp(1.0, part.level(b)));
        for (std::size_t m = 0; m <= g.size() / 2; ++m) {
            const double xi = g.wavenumber(m);
            if (xi < lo * (1 - 1e-12) || xi > hi * (1 + 1e-12)) EXPECT_EQ(part.table(b)[m], 0.0);
        }
    }
}

TEST(Partition, TooCoarseGridIsRejected) { EXPECT_THROW(DyadicPartition(Grid(40.0, 16)), ConfigError); }

TEST(Partition, ReconstructsTheInput) {
    const Grid g(40.0, 1 << 14);
    const DyadicPartition part(g);
    const PeakonPairParams a{10.0, 0.01, Regime{}, 0.5};
    const Field f = sample_u0(a, g);
    const auto blocks = lp_blocks(part, f);
    std::vector<double> sum(g.size(), 0.0);
    for (const auto& b : blocks)
        for (std::size_t j = 0; j < g.size(); ++j) sum[j] += b[j];
    EXPECT_LE(relative_l2(Field(g, sum), f), 1e-10);
}

TEST(Partition, PureModeSitsInOneBlock) {
    const Grid g(16.0 * std::numbers::pi, 1 << 12);
    const DyadicPartition part(g);
    // Annulus j = 3 is centred at 2^3 = 8, away from both transition bands.
    const Field f = sample([](double x) { return std::cos(8.0 * x); }, g);
    const auto blocks = lp_blocks(part, f);
    EXPECT_LT(relative_l2(blocks[4], f), 1e-12);
    for (std::size_t b = 0; b < blocks.size(); ++b)
        if (b != 4) EXPECT_LT(blocks[b].max_abs(), 1e-12);
}

TEST(Besov, SingleAnnularMode) {
    const Grid g(16.0 * std::numbers::pi, 1 << 12);
    const DyadicPartition part(g);
    const Field f = sample([](double x) { return std::cos(8.0 * x); }, g);
    for (double s : {0.5, 1.0, 1.2})
        for (double p : {2.0, 4.0}) {
            const double expect = std::pow(2.0, 3.0 * s) * lp_norm(f, p);
            EXPECT_NEAR(besov_norm(part, f, s, p, 2.0) / expect, 1.0, 0.2);
        }
}

TEST(Besov, ZeroAndHomogeneity) {
    const Grid g(40.0, 1 << 12);
    const DyadicPartition part(g);
    EXPECT_EQ(besov_norm(part, Field::zeros(g), 1.0, 2.0, 2.0), 0.0);
    const Field f = sample_u0({2.0, 0.1, Regime{}, 0.5}, g);
    for (double c : {-3.0, 0.25, 17.0})
        EXPECT_NEAR(besov_norm(part, c * f, 1.1, 3.0, 1.0), std::abs(c) * besov_norm(part, f, 1.1, 3.0, 1.0),
                    1e-12 * std::abs(c) * besov_norm(part, f, 1.1, 3.0, 1.0));
}

TEST(Besov, NondecreasingInSmoothnessWithoutLowBlock) {
    // Every annulus j >= 0 carries a weight 2^{js} that grows with s.
    const Grid g(40.0, 1 << 12);
    const DyadicPartition part(g);
    const Field u = sample_u0({1.0, 0.05, Regime{}, 0.5}, g);
    const auto blocks = lp_blocks(part, u);
    const Field f = u - blocks[0];
    for (double r : {1.0, 2.0, infinity}) {
        double prev = 0.0;
        for (double s = -0.5; s <= 1.5; s += 0.1) {
            const double v = besov_norm(part, f, s, 2.0, r);
            EXPECT_GE(v, prev * (1.0 - 1e-12));
            prev = v;
        }
    }
}

TEST(Besov, LowBlockWeightDecreasesInSmoothness) {
    // The j = -1 weight is 2^{-s}, so data living in the low block has a norm decreasing in s.
    const Grid g(200.0, 1 << 12);
    const DyadicPartition part(g);
    const Field f = sample([](double x) { return std::exp(-x * x / 400.0); }, g);
    const auto blocks = lp_blocks(part, f);
    EXPECT_LT(relative_l2(blocks[0], f), 1e-12);
    for (double s : {0.0, 0.5, 1.0})
        EXPECT_NEAR(besov_norm(part, f, s, 2.0, 2.0), std::pow(2.0, -s) * lp_norm(f, 2.0), 1e-9);
}

TEST(Besov, RejectsInvalidExponents) {
    const Grid g(40.0, 1 << 10);
    const DyadicPartition part(g);
    const Field f = Field::zeros(g);
    EXPECT_THROW(besov_norm(part, f, 1.0, 0.5, 2.0), ConfigError);
    EXPECT_THROW(besov_norm(part, f, 1.0, 2.0, std::nan("")), ConfigError);
    EXPECT_THROW(besov_norm(part, f, infinity, 2.0, 2.0), ConfigError);
}

TEST(Sobolev, SymbolRouteAgainstGaussianOracle) {
    // Oracle: mpmath quadrature of (1 + xi^2)^s pi exp(-xi^2 / 2) / (2 pi).
    const Grid g(20.0, 1 << 12);
    const Field f = sample([](double x) { return std::exp(-x * x); }, g);
    EXPECT_NEAR(sobolev_norm_symbol(f, 1.0), 1.58323348708616, 1e-10);
    EXPECT_NEAR(sobolev_norm_symbol(f, 0.5), 1.30293998679617, 1e-10);
}

TEST(Sobolev, DualRoutesAgreeOnGaussianBumps) {
    const Grid g(20.0, 1 << 14);
    const DyadicPartition part(g);
    for (double width : {0.3, 0.1, 0.03}) {
        const Field f = sample([width](double x) { return std::exp(-x * x / (width * width)); }, g);
        for (double s : {0.0, 0.5, 1.0, 1.5}) {
            const double a = sobolev_norm(part, f, s), b = sobolev_norm_symbol(f, s);
            EXPECT_LT(std::abs(a / b - 1.0), 0.15) << "width " << width << " s = " << s;
        }
    }
}

TEST(Sobolev, SymbolRouteAgainstPeakonPairClosedForm) {
    const Grid g(40.0, 1 << 16);
    for (double sigma : {0.8, 1.0, 1.2}) {
        const double exact = hs_norm_exact(1.0, 0.08, sigma);
        const Field f = sample_u0({1.0, 0.08, Regime{}, 0.5}, g);
        EXPECT_LT(std::abs(sobolev_norm_symbol(f, sigma) / exact - 1.0), 0.02) << sigma;
    }
}

TEST(W1p, ZeroAndDerivativeDominance) {
    EXPECT_EQ(w1p_norm(Field::zeros(Grid(40.0, 64)), Field::zeros(Grid(40.0, 64)), 2.0), 0.0);
    const PeakonPairParams a{10.0, 0.01, Regime{}, 0.5};
    // ||u0||_2 + ||u0'||_2 from the closed forms; the derivative part is sqrt(A0 + exterior tails).
    const double tails = a.p0 * a.p0 * std::pow(std::exp(a.q0) - std::exp(-a.q0), 2) * std::exp(-2.0 * a.q0);
    const double exact = u0_l2_exact(a) + std::sqrt(a0_exact(a) + tails);
    double previous = 1.0;
    for (std::size_t n : {std::size_t{1} << 15, std::size_t{1} << 16, std::size_t{1} << 17}) {
        const Grid g(40.0, n);
        const Field u = sample_u0(a, g);
        const Field ux = sample(
            [&](double x) { return std::abs(std::abs(x) - a.q0) < 1e-15 ? 0.0 : u0_prime_eval(a, x); }, g);
        // The jumps of u0' at +-q0 make the grid quadrature first order in h.
        const double err = std::abs(w1p_norm(u, ux, 2.0) / exact - 1.0);
        EXPECT_LT(err, 0.6 * previous);
        EXPECT_LT(err, 0.05);
        EXPECT_GT(lp_norm(ux, 2.0), 0.95 * std::sqrt(a0_exact(a)));
        previous = err;
    }
}
