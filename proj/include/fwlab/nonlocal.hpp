#pragma once

#include <array>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "fwlab/fft.hpp"
#include "fwlab/grid.hpp"

namespace fwlab {

enum class NonlocalStrategy { fourier_symbol, exponential_recursion };

inline std::string_view to_string(NonlocalStrategy s) {
    return s == NonlocalStrategy::fourier_symbol ? "fourier-symbol" : "exponential-recursion";
}

inline NonlocalStrategy parse_nonlocal_strategy(std::string_view s) {
    if (s == "fourier-symbol") return NonlocalStrategy::fourier_symbol;
    if (s == "exponential-recursion") return NonlocalStrategy::exponential_recursion;
    throw ConfigError("unknown nonlocal strategy '" + std::string(s) + "'");
}

// G*f and d/dx (G*f) computed together, G(x) = exp(-|x|)/2.
struct SmoothedPair {
    Field smooth;
    Field source;
};

// The operators (1 - d^2)^{-1}, d (1 - d^2)^{-1} and d^2 (1 - d^2)^{-1} on a periodic grid.
class NonlocalEngine {
public:
    explicit NonlocalEngine(Grid grid, NonlocalStrategy strategy = NonlocalStrategy::fourier_symbol)
        : grid_(grid), strategy_(strategy) {
        const std::size_t half = grid_.size() / 2 + 1;
        helmholtz_symbol_.resize(half);
        derivative_symbol_.resize(half);
        for (std::size_t m = 0; m < half; ++m) {
            const double k = grid_.wavenumber(m);
            helmholtz_symbol_[m] = 1.0 / (1.0 + k * k);
            // The Nyquist mode has no real derivative; it is dropped.
            derivative_symbol_[m] = (m == grid_.size() / 2) ? 0.0 : k / (1.0 + k * k);
        }
        build_recursion_weights();
    }

    const Grid& grid() const noexcept { return grid_; }
    NonlocalStrategy strategy() const noexcept { return strategy_; }
    std::size_t symbol_length() const noexcept { return grid_.size(); }

    SmoothedPair smooth_and_source(const Field& f) const {
        require_same_grid(f.grid(), grid_, "nonlocal operator");
        return strategy_ == NonlocalStrategy::fourier_symbol ? spectral(f) : recursive(f);
    }

    Field helmholtz_inverse(const Field& f) const { return smooth_and_source(f).smooth; }
    Field source_term(const Field& u) const { return smooth_and_source(u).source; }
    Field v_term(const Field& u) const { return helmholtz_inverse(u) - u; }

private:
    SmoothedPair spectral(const Field& f) const {
        const std::size_t n = grid_.size();
        const Spectrum fh = rfft(f.values());
        Spectrum a(fh.size()), b(fh.size());
        for (std::size_t m = 0; m < fh.size(); ++m) {
            a[m] = fh[m] * helmholtz_symbol_[m];
            b[m] = fh[m] * std::complex<double>(0.0, derivative_symbol_[m]);
        }
        return {Field(grid_, irfft(a, n)), Field(grid_, irfft(b, n))};
    }

    // Two-pass exponential filter: F_j = int_{-inf}^{x_j} e^{-(x_j-y)} f, B_j = int_{x_j}^{inf} e^{-(y-x_j)} f.
    // Each cell integral uses a six-point local polynomial, so the route is sixth-order accurate.
    SmoothedPair recursive(const Field& f) const {
        const std::size_t n = grid_.size();
        const auto ni = static_cast<std::ptrdiff_t>(n);
        const double decay = std::exp(-grid_.spacing());
        auto at = [&](std::ptrdiff_t i) { return f[detail::wrap(i, n)]; };

        std::vector<double> F(n), B(n);
        double acc = 0.0;
        for (std::ptrdiff_t j = 0; j < ni; ++j) {
            double cell = 0.0;
            for (int k = 0; k < 6; ++k) cell += weights_[k] * at(j - 3 + k);
            acc = decay * acc + cell;
            F[static_cast<std::size_t>(j)] = acc;
        }
        const double wrap_gain = 1.0 / (1.0 - std::pow(decay, static_cast<double>(n)));
        double carry = F[n - 1] * wrap_gain;
        for (std::size_t j = 0; j < n; ++j) {
            carry *= decay;
            F[j] += carry;
        }

        acc = 0.0;
        for (std::ptrdiff_t j = ni - 1; j >= 0; --j) {
            double cell = 0.0;
            for (int k = 0; k < 6; ++k) cell += weights_[5 - k] * at(j - 2 + k);
            acc = decay * acc + cell;
            B[static_cast<std::size_t>(j)] = acc;
        }
        carry = B[0] * wrap_gain;
        for (std::size_t jj = n; jj-- > 0;) {
            carry *= decay;
            B[jj] += carry;
        }

        std::vector<double> smooth(n), source(n);
        for (std::size_t j = 0; j < n; ++j) {
            smooth[j] = 0.5 * (F[j] + B[j]);
            source[j] = 0.5 * (B[j] - F[j]);
        }
        return {Field(grid_, std::move(smooth)), Field(grid_, std::move(source))};
    }

    // w_k = int_0^h e^{-(h - tau)} l_k(tau) dtau, Lagrange basis on nodes tau = (k - 2) h.
    void build_recursion_weights() {
        static constexpr std::array<double, 10> gl_x{
            -0.9739065285171717, -0.8650633666889845, -0.6794095682990244, -0.4333953941292472,
            -0.1488743389816312, 0.1488743389816312,  0.4333953941292472,  0.6794095682990244,
            0.8650633666889845,  0.9739065285171717};
        static constexpr std::array<double, 10> gl_w{
            0.0666713443086881, 0.1494513491505806, 0.2190863625159820, 0.2692667193099963,
            0.2955242247147529, 0.2955242247147529, 0.2692667193099963, 0.2190863625159820,
            0.1494513491505806, 0.0666713443086881};
        const double h = grid_.spacing();
        weights_.fill(0.0);
        for (std::size_t q = 0; q < gl_x.size(); ++q) {
            const double s = 0.5 * (gl_x[q] + 1.0);  // tau / h in [0, 1]
            const double kernel = std::exp(-h * (1.0 - s)) * 0.5 * h * gl_w[q];
            for (int k = 0; k < 6; ++k) {
                double lk = 1.0;
                for (int m = 0; m < 6; ++m) {
                    if (m != k) lk *= (s - (m - 2)) / static_cast<double>(k - m);
                }
                weights_[static_cast<std::size_t>(k)] += kernel * lk;
            }
        }
    }

    Grid grid_;
    NonlocalStrategy strategy_;
    std::vector<double> helmholtz_symbol_;
    std::vector<double> derivative_symbol_;
    std::array<double, 6> weights_{};
};

}  // namespace fwlab
