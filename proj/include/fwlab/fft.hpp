#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include <fftw3.h>

#include "fwlab/error.hpp"

namespace fwlab {

using Spectrum = std::vector<std::complex<double>>;

namespace detail {

struct FftwFree {
    void operator()(void* p) const noexcept { fftw_free(p); }
};

template <class T>
using fftw_buffer = std::unique_ptr<T[], FftwFree>;

// FFTW planning is not thread-safe; execution with fresh aligned buffers is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct PlanPair {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
};

inline PlanPair plans_for(std::size_t n) {
    std::lock_guard lock(fftw_planner_mutex());
    static std::map<std::size_t, PlanPair> cache;
    if (auto it = cache.find(n); it != cache.end()) return it->second;
    fftw_buffer<double> re(fftw_alloc_real(n));
    fftw_buffer<fftw_complex> co(fftw_alloc_complex(n / 2 + 1));
    const int ni = static_cast<int>(n);
    PlanPair p;
    p.forward = fftw_plan_dft_r2c_1d(ni, re.get(), co.get(), FFTW_ESTIMATE);
    p.backward = fftw_plan_dft_c2r_1d(ni, co.get(), re.get(), FFTW_ESTIMATE);
    if (!p.forward || !p.backward) throw NumericalError("FFTW planning failed for size " + std::to_string(n));
    cache.emplace(n, p);
    return p;
}

// Aligned work buffers reused per thread, so execution never shares memory across threads.
struct Workspace {
    std::size_t n = 0;
    fftw_buffer<double> real;
    fftw_buffer<fftw_complex> spec;
};

inline Workspace& workspace_for(std::size_t n) {
    thread_local std::map<std::size_t, Workspace> pool;
    Workspace& w = pool[n];
    if (w.n != n) {
        w.n = n;
        w.real.reset(fftw_alloc_real(n));
        w.spec.reset(fftw_alloc_complex(n / 2 + 1));
    }
    return w;
}

}  // namespace detail

// Unnormalized real-to-half-complex transform: X_m = sum_j x_j e^{-2 pi i j m / N}, m = 0..N/2.
inline Spectrum rfft(std::span<const double> x) {
    const std::size_t n = x.size();
    const auto plans = detail::plans_for(n);
    auto& w = detail::workspace_for(n);
    std::copy(x.begin(), x.end(), w.real.get());
    fftw_execute_dft_r2c(plans.forward, w.real.get(), w.spec.get());
    Spectrum s(n / 2 + 1);
    for (std::size_t m = 0; m < s.size(); ++m) s[m] = {w.spec[m][0], w.spec[m][1]};
    return s;
}

// Inverse of rfft including the 1/N normalization.
inline std::vector<double> irfft(const Spectrum& s, std::size_t n) {
    if (s.size() != n / 2 + 1) throw ConfigError("irfft: spectrum length does not match N");
    const auto plans = detail::plans_for(n);
    auto& w = detail::workspace_for(n);
    for (std::size_t m = 0; m < s.size(); ++m) {
        w.spec[m][0] = s[m].real();
        w.spec[m][1] = s[m].imag();
    }
    fftw_execute_dft_c2r(plans.backward, w.spec.get(), w.real.get());
    std::vector<double> x(w.real.get(), w.real.get() + n);
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& v : x) v *= inv;
    return x;
}

}  // namespace fwlab
