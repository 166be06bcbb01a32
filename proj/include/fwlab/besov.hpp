#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "fwlab/fft.hpp"
#include "fwlab/grid.hpp"

namespace fwlab {

namespace detail {

// C-infinity transition from 0 (x <= 0) to 1 (x >= 1).
inline double smooth_transition(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / x);
    const double b = std::exp(-1.0 / (1.0 - x));
    return a / (a + b);
}

}  // namespace detail

// Low-frequency cutoff: chi = 1 on |xi| <= lp_inner, 0 on |xi| >= lp_outer. The radii are the usual
// 3/4 and 4/3 divided by sqrt(2), which puts the geometric centre of annulus j at |xi| = 2^j.
inline constexpr double lp_inner = 0.75 / std::numbers::sqrt2;
inline constexpr double lp_outer = (4.0 / 3.0) / std::numbers::sqrt2;

inline double lp_chi(double xi) {
    return 1.0 - detail::smooth_transition((std::abs(xi) - lp_inner) / (lp_outer - lp_inner));
}

// Nonhomogeneous dyadic partition: block -1 is chi(xi), block j >= 0 is chi(2^{-j-1} xi) - chi(2^{-j} xi),
// supported in lp_inner 2^j <= |xi| <= 2 lp_outer 2^j. The annuli stop once chi(2^{-J} xi) = 1 at the
// Nyquist frequency, so the blocks sum to one on every resolved frequency.
class DyadicPartition {
public:
    explicit DyadicPartition(Grid g) : grid_(g) {
        const double nyquist = grid_.wavenumber(grid_.size() / 2);
        while (lp_inner * std::ldexp(1.0, static_cast<int>(annuli_)) < nyquist) ++annuli_;
        if (annuli_ < 3) throw ConfigError("grid too coarse for three dyadic annuli");
        const std::size_t half = grid_.size() / 2 + 1;
        tables_.assign(annuli_ + 1, std::vector<double>(half));
        for (std::size_t m = 0; m < half; ++m) {
            const double xi = grid_.wavenumber(m);
            tables_[0][m] = lp_chi(xi);
            for (std::size_t j = 0; j < annuli_; ++j) {
                const int jj = static_cast<int>(j);
                tables_[j + 1][m] = lp_chi(std::ldexp(xi, -jj - 1)) - lp_chi(std::ldexp(xi, -jj));
            }
        }
    }

    const Grid& grid() const noexcept { return grid_; }
    double low_block_cutoff() const noexcept { return lp_outer; }
    std::size_t annuli() const noexcept { return annuli_; }
    std::size_t block_count() const noexcept { return annuli_ + 1; }
    // Block b = 0 is j = -1; block b >= 1 is j = b - 1.
    int level(std::size_t b) const noexcept { return static_cast<int>(b) - 1; }
    const std::vector<double>& table(std::size_t b) const { return tables_.at(b); }

    double unity_residual() const {
        double worst = 0.0;
        for (std::size_t m = 0; m < tables_[0].size(); ++m) {
            double sum = 0.0;
            for (const auto& t : tables_) sum += t[m];
            worst = std::max(worst, std::abs(sum - 1.0));
        }
        return worst;
    }

private:
    Grid grid_;
    std::size_t annuli_ = 0;
    std::vector<std::vector<double>> tables_;
};

inline DyadicPartition build_partition(const Grid& g) { return DyadicPartition(g); }

inline std::vector<Field> lp_blocks(const DyadicPartition& part, const Field& f) {
    require_same_grid(f.grid(), part.grid(), "lp_blocks");
    const std::size_t n = f.size();
    const Spectrum fh = rfft(f.values());
    std::vector<Field> out;
    out.reserve(part.block_count());
    Spectrum b(fh.size());
    for (std::size_t k = 0; k < part.block_count(); ++k) {
        const auto& t = part.table(k);
        for (std::size_t m = 0; m < fh.size(); ++m) b[m] = fh[m] * t[m];
        out.emplace_back(f.grid(), irfft(b, n));
    }
    return out;
}

// ell^r over j >= -1 of 2^{js} ||Delta_j f||_{L^p}.
inline double besov_norm(const DyadicPartition& part, const Field& f, double s, double p, double r) {
    if (!std::isfinite(s)) throw ConfigError("Besov smoothness must be finite");
    require_exponent(p, "Besov integrability p");
    require_exponent(r, "Besov summability r");
    const auto blocks = lp_blocks(part, f);
    std::vector<double> terms(blocks.size());
    for (std::size_t k = 0; k < blocks.size(); ++k)
        terms[k] = std::pow(2.0, s * part.level(k)) * lp_norm(blocks[k], p);
    double big = 0.0;
    for (double t : terms) big = std::max(big, t);
    if (std::isinf(r) || big == 0.0) return big;
    double acc = 0.0;
    for (double t : terms) acc += std::pow(t / big, r);
    return big * std::pow(acc, 1.0 / r);
}

inline double sobolev_norm(const DyadicPartition& part, const Field& f, double s) {
    return besov_norm(part, f, s, 2.0, 2.0);
}

// (1/(2 pi) int (1 + xi^2)^s |f^(xi)|^2 dxi)^{1/2} with the continuous transform approximated by h * DFT.
inline double sobolev_norm_symbol(const Field& f, double s) {
    const Grid& g = f.grid();
    const std::size_t n = g.size();
    const Spectrum fh = rfft(f.values());
    double acc = 0.0;
    for (std::size_t m = 0; m < fh.size(); ++m) {
        const double weight = (m == 0 || m == n / 2) ? 1.0 : 2.0;
        const double xi = g.wavenumber(m);
        acc += weight * std::pow(1.0 + xi * xi, s) * std::norm(fh[m]);
    }
    const double h = g.spacing();
    return std::sqrt(acc * h * h / g.period());
}

inline double w1p_norm(const Field& f, const Field& fx, double p) {
    require_same_grid(f.grid(), fx.grid(), "w1p_norm");
    return lp_norm(f, p) + lp_norm(fx, p);
}

}  // namespace fwlab
