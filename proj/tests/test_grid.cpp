#include <cmath>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "fwlab/grid.hpp"

using namespace fwlab;

TEST(Grid, RejectsSizesThatAreNotPowersOfTwo) {
    EXPECT_THROW(Grid(40.0, 1000), ConfigError);
    EXPECT_THROW(Grid(40.0, 8), ConfigError);
    EXPECT_THROW(Grid(-1.0, 1024), ConfigError);
    EXPECT_NO_THROW(Grid(40.0, 1024));
}

TEST(Grid, NodesAndWavenumbers) {
    const Grid g(40.0, 1024);
    EXPECT_DOUBLE_EQ(g.spacing(), 80.0 / 1024.0);
    EXPECT_DOUBLE_EQ(g.x(0), -40.0);
    EXPECT_DOUBLE_EQ(g.x(512), 0.0);
    EXPECT_DOUBLE_EQ(g.wavenumber(1), 2.0 * std::numbers::pi / 80.0);
}

TEST(Field, RejectsNonFiniteValues) {
    const Grid g(1.0, 16);
    std::vector<double> v(16, 0.0);
    v[3] = std::nan("");
    EXPECT_THROW(Field(g, v), NumericalError);
    EXPECT_THROW(Field(g, std::vector<double>(15, 0.0)), ConfigError);
}

TEST(Field, ArithmeticRequiresMatchingGrids) {
    const Field a = Field::zeros(Grid(1.0, 16));
    const Field b = Field::zeros(Grid(1.0, 32));
    EXPECT_THROW(a + b, ConfigError);
}

TEST(Interpolate, ReproducesCubicsAwayFromTheSeam) {
    const Grid g(10.0, 256);
    auto cubic = [](double x) { return 0.3 * x * x * x - x * x + 2.0 * x - 1.0; };
    const Field f = sample(cubic, g);
    for (double x : {-3.21, -0.5, 0.0, 1.234567, 4.9})
        EXPECT_NEAR(interpolate(f, x), cubic(x), 1e-9 * std::max(1.0, std::abs(cubic(x))));
}

TEST(Interpolate, LinearVariantIsExactOnLines) {
    const Grid g(5.0, 64);
    const Field f = sample([](double x) { return 2.0 * x + 1.0; }, g);
    EXPECT_NEAR(interpolate_linear(f, 0.3337), 2.0 * 0.3337 + 1.0, 1e-13);
}

TEST(Interpolate, RejectsPointsOutsideTheGrid) {
    const Field f = Field::zeros(Grid(1.0, 16));
    EXPECT_THROW(interpolate(f, 1.5), ConfigError);
}

TEST(LpNorm, ConstantAndSupremum) {
    const Grid g(2.0, 64);
    const Field c = sample([](double) { return -3.0; }, g);
    EXPECT_NEAR(lp_norm(c, 2.0), 3.0 * std::sqrt(4.0), 1e-12);
    EXPECT_NEAR(lp_norm(c, 1.0), 12.0, 1e-12);
    EXPECT_DOUBLE_EQ(lp_norm(c, infinity), 3.0);
    EXPECT_EQ(lp_norm(Field::zeros(g), 3.0), 0.0);
    EXPECT_THROW(lp_norm(c, 0.5), ConfigError);
}

TEST(LpNorm, GaussianMatchesClosedForm) {
    const Grid g(20.0, 4096);
    const Field f = sample([](double x) { return std::exp(-x * x); }, g);
    EXPECT_NEAR(lp_norm(f, 2.0), std::pow(std::numbers::pi / 2.0, 0.25), 1e-12);
}

TEST(IntegrateWindow, ExactForPiecewiseLinearData) {
    const Grid g(4.0, 128);
    const Field f = sample([](double x) { return 3.0 * x - 0.5; }, g);
    const double a = -1.2345, b = 2.71;
    EXPECT_NEAR(integrate_window(f, a, b), 1.5 * (b * b - a * a) - 0.5 * (b - a), 1e-12);
    EXPECT_NEAR(integrate_window(f, 0.01, 0.02), 1.5 * (0.0004 - 0.0001) - 0.005, 1e-14);
}

TEST(IntegrateWindow, AdditiveOverAdjacentWindows) {
    const Grid g(4.0, 256);
    const Field f = sample([](double x) { return std::sin(3.0 * x) + x * x; }, g);
    const double whole = integrate_window(f, -2.0, 3.0);
    const double split = integrate_window(f, -2.0, 0.123) + integrate_window(f, 0.123, 3.0);
    EXPECT_NEAR(whole, split, 1e-12);
    EXPECT_THROW(integrate_window(f, 1.0, 1.0), ConfigError);
}

TEST(Derivative, SecondOrderOnSmoothPeriodicData) {
    for (std::size_t n : {256u, 512u}) {
        const Grid g(std::numbers::pi, n);
        const Field f = sample([](double x) { return std::sin(2.0 * x); }, g);
        const Field d = derivative(f);
        double err = 0.0;
        for (std::size_t j = 0; j < n; ++j) err = std::max(err, std::abs(d[j] - 2.0 * std::cos(2.0 * g.x(j))));
        const double h = g.spacing();
        EXPECT_LT(err, 8.0 * h * h / 6.0 * 1.01);
    }
}

TEST(FormatDouble, RoundTrips) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(-1e6, 1e6);
    for (int i = 0; i < 200; ++i) {
        const double v = dist(rng) * std::pow(10.0, static_cast<int>(rng() % 20) - 10);
        EXPECT_EQ(std::strtod(format_double(v).c_str(), nullptr), v);
    }
    EXPECT_EQ(format_double(0.5), "0.5");
}

TEST(BinaryDump, RoundTripsBitForBit) {
    const Grid g(3.0, 64);
    const Field f = sample([](double x) { return std::exp(-x) * std::cos(7.0 * x); }, g);
    const auto path = (std::filesystem::temp_directory_path() / "fwlab_roundtrip.bin").string();
    write_binary(f, path);
    EXPECT_EQ(std::filesystem::file_size(path), 16u + 8u * 64u);
    const Field back = read_binary(path);
    EXPECT_TRUE(back.grid() == g);
    for (std::size_t j = 0; j < g.size(); ++j) EXPECT_EQ(back[j], f[j]);
    std::filesystem::remove(path);
}
