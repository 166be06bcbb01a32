#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fwlab/error.hpp"

namespace fwlab {

// Uniform periodic grid x_j = -L + j h on [-L, L), N a power of two.
class Grid {
public:
    Grid(double half_width, std::size_t count) : L_(half_width), N_(count) {
        if (!(half_width > 0.0) || !std::isfinite(half_width))
            throw ConfigError("grid half-width must be positive, got " + std::to_string(half_width));
        if (count < 16 || !std::has_single_bit(count))
            throw ConfigError("grid point count must be a power of two >= 16, got " + std::to_string(count));
        h_ = 2.0 * L_ / static_cast<double>(N_);
    }

    double half_width() const noexcept { return L_; }
    std::size_t size() const noexcept { return N_; }
    double spacing() const noexcept { return h_; }
    double x(std::size_t j) const noexcept { return -L_ + static_cast<double>(j) * h_; }
    double period() const noexcept { return 2.0 * L_; }

    // Angular wavenumber of DFT index m in [0, N/2].
    double wavenumber(std::size_t m) const noexcept {
        return 2.0 * std::numbers::pi * static_cast<double>(m) / period();
    }

    friend bool operator==(const Grid& a, const Grid& b) noexcept {
        return a.N_ == b.N_ && a.L_ == b.L_;
    }

private:
    double L_;
    std::size_t N_;
    double h_ = 0.0;
};

inline Grid make_grid(double L, std::size_t N) { return Grid(L, N); }

// Immutable samples on a Grid. Construction rejects non-finite values.
class Field {
public:
    Field(Grid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
        if (values_.size() != grid_.size())
            throw ConfigError("field length " + std::to_string(values_.size()) +
                              " does not match grid size " + std::to_string(grid_.size()));
        for (std::size_t j = 0; j < values_.size(); ++j) {
            if (!std::isfinite(values_[j]))
                throw NumericalError("non-finite field value at index " + std::to_string(j));
        }
    }

    static Field zeros(const Grid& g) { return Field(g, std::vector<double>(g.size(), 0.0)); }

    const Grid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t j) const noexcept { return values_[j]; }
    std::span<const double> values() const noexcept { return values_; }

    double max_abs() const noexcept {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }
    double min() const noexcept { return *std::min_element(values_.begin(), values_.end()); }
    double max() const noexcept { return *std::max_element(values_.begin(), values_.end()); }

private:
    Grid grid_;
    std::vector<double> values_;
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* where) {
    if (!(a == b)) throw ConfigError(std::string(where) + ": grid mismatch");
}

template <class F>
Field sample(F&& f, const Grid& g) {
    std::vector<double> v(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) {
        v[j] = f(g.x(j));
        if (!std::isfinite(v[j]))
            throw NumericalError("sampled function returned a non-finite value at x = " +
                                 std::to_string(g.x(j)));
    }
    return Field(g, std::move(v));
}

// Pointwise combination of two fields on the same grid.
template <class Op>
Field zip(const Field& a, const Field& b, Op&& op) {
    require_same_grid(a.grid(), b.grid(), "zip");
    std::vector<double> v(a.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = op(a[j], b[j]);
    return Field(a.grid(), std::move(v));
}

template <class Op>
Field map(const Field& a, Op&& op) {
    std::vector<double> v(a.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = op(a[j]);
    return Field(a.grid(), std::move(v));
}

inline Field operator+(const Field& a, const Field& b) {
    return zip(a, b, [](double x, double y) { return x + y; });
}
inline Field operator-(const Field& a, const Field& b) {
    return zip(a, b, [](double x, double y) { return x - y; });
}
inline Field operator*(double c, const Field& a) {
    return map(a, [c](double x) { return c * x; });
}

namespace detail {

inline std::size_t wrap(std::ptrdiff_t i, std::size_t n) {
    const auto m = static_cast<std::ptrdiff_t>(n);
    return static_cast<std::size_t>(((i % m) + m) % m);
}

// Locate x in the grid: cell index i with x_i <= x < x_{i+1} and local coordinate t in [0,1).
inline std::pair<std::size_t, double> locate(const Grid& g, double x) {
    const double L = g.half_width();
    const double h = g.spacing();
    if (!(x >= -L && x <= L - h))
        throw ConfigError("position " + std::to_string(x) + " outside the grid [" + std::to_string(-L) +
                          ", " + std::to_string(L - h) + "]");
    double s = (x + L) / h;
    auto i = static_cast<std::size_t>(std::floor(s));
    if (i >= g.size()) i = g.size() - 1;
    return {i, s - static_cast<double>(i)};
}

}  // namespace detail

// Four-point Lagrange interpolation on nodes i-1, i, i+1, i+2 (periodic wrap).
inline double interpolate(const Field& f, double x) {
    const auto [i, t] = detail::locate(f.grid(), x);
    const std::size_t n = f.size();
    const auto ii = static_cast<std::ptrdiff_t>(i);
    const double fm = f[detail::wrap(ii - 1, n)];
    const double f0 = f[i];
    const double f1 = f[detail::wrap(ii + 1, n)];
    const double f2 = f[detail::wrap(ii + 2, n)];
    const double wm = -t * (t - 1.0) * (t - 2.0) / 6.0;
    const double w0 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    const double w1 = -(t + 1.0) * t * (t - 2.0) / 2.0;
    const double w2 = (t + 1.0) * t * (t - 1.0) / 6.0;
    return wm * fm + w0 * f0 + w1 * f1 + w2 * f2;
}

// Piecewise-linear interpolation, used where overshoot must be avoided.
inline double interpolate_linear(const Field& f, double x) {
    const auto [i, t] = detail::locate(f.grid(), x);
    return (1.0 - t) * f[i] + t * f[detail::wrap(static_cast<std::ptrdiff_t>(i) + 1, f.size())];
}

inline constexpr double infinity = std::numeric_limits<double>::infinity();

inline void require_exponent(double p, const char* what) {
    if (std::isnan(p) || p < 1.0) throw ConfigError(std::string(what) + " must be >= 1 or inf");
}

// Periodic composite trapezoid: (h * sum |f_j|^p)^(1/p); max |f_j| for p = inf.
inline double lp_norm(const Field& f, double p) {
    require_exponent(p, "lp_norm exponent");
    if (std::isinf(p)) return f.max_abs();
    const double scale = f.max_abs();
    if (scale == 0.0) return 0.0;
    double acc = 0.0;
    for (double v : f.values()) acc += std::pow(std::abs(v) / scale, p);
    return scale * std::pow(f.grid().spacing() * acc, 1.0 / p);
}

// Exact integral of the piecewise-linear interpolant of f over [a, b].
inline double integrate_window(const Field& f, double a, double b) {
    const Grid& g = f.grid();
    if (!(a < b)) throw ConfigError("integrate_window needs a < b");
    const double L = g.half_width();
    const double h = g.spacing();
    if (a < -L || b > L - h) throw ConfigError("integrate_window range outside the grid");
    const auto [ia, ta] = detail::locate(g, a);
    const auto [ib, tb] = detail::locate(g, b);
    auto node = [&](std::size_t i) { return f[std::min(i, g.size() - 1)]; };
    if (ia == ib) {
        const double fa = (1.0 - ta) * node(ia) + ta * node(ia + 1);
        const double fb = (1.0 - tb) * node(ib) + tb * node(ib + 1);
        return 0.5 * (fa + fb) * (b - a);
    }
    const double fa = (1.0 - ta) * node(ia) + ta * node(ia + 1);
    double acc = 0.5 * (fa + node(ia + 1)) * (1.0 - ta) * h;
    for (std::size_t i = ia + 1; i < ib; ++i) acc += 0.5 * (f[i] + f[i + 1]) * h;
    const double fb = (1.0 - tb) * node(ib) + tb * node(ib + 1);
    acc += 0.5 * (node(ib) + fb) * tb * h;
    return acc;
}

// Second-order central difference with periodic wrap.
inline Field derivative(const Field& f) {
    const std::size_t n = f.size();
    const double inv = 1.0 / (2.0 * f.grid().spacing());
    std::vector<double> d(n);
    for (std::size_t j = 0; j < n; ++j) d[j] = (f[(j + 1) % n] - f[(j + n - 1) % n]) * inv;
    return Field(f.grid(), std::move(d));
}

// Relative L2 distance ||a - b|| / ||b||.
inline double relative_l2(const Field& a, const Field& b) {
    const double nb = lp_norm(b, 2.0);
    return nb == 0.0 ? lp_norm(a, 2.0) : lp_norm(a - b, 2.0) / nb;
}

// Shortest decimal that round-trips a double.
inline std::string format_double(double v) {
    char buf[32];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

inline void write_csv(const Field& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open " + path + " for writing");
    out << "x,value\n";
    for (std::size_t j = 0; j < f.size(); ++j)
        out << format_double(f.grid().x(j)) << ',' << format_double(f[j]) << '\n';
}

namespace detail {

template <class T>
void put_le(std::ostream& out, T value) {
    std::uint64_t bits;
    static_assert(sizeof(T) == sizeof bits);
    std::memcpy(&bits, &value, sizeof bits);
    for (int k = 0; k < 8; ++k) out.put(static_cast<char>((bits >> (8 * k)) & 0xffu));
}

template <class T>
T get_le(std::istream& in) {
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k) {
        const int c = in.get();
        if (c == EOF) throw ConfigError("truncated field dump");
        bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * k);
    }
    T value;
    std::memcpy(&value, &bits, sizeof bits);
    return value;
}

}  // namespace detail

// Binary layout: uint64 N, float64 L, then N float64 values, all little-endian.
inline void write_binary(const Field& f, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open " + path + " for writing");
    detail::put_le<std::uint64_t>(out, f.size());
    detail::put_le<double>(out, f.grid().half_width());
    for (double v : f.values()) detail::put_le<double>(out, v);
}

inline Field read_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path);
    const auto n = detail::get_le<std::uint64_t>(in);
    const auto L = detail::get_le<double>(in);
    Grid g(L, static_cast<std::size_t>(n));
    std::vector<double> v(g.size());
    for (auto& x : v) x = detail::get_le<double>(in);
    return Field(g, std::move(v));
}

}  // namespace fwlab
