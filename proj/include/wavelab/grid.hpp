#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "wavelab/errors.hpp"
#include "wavelab/fft.hpp"
#include "wavelab/numerics.hpp"

namespace wavelab::spde {

/// Uniform periodic grid on [0, L)^d with N nodes per axis (power of two).
/// 2-D data is stored row-major: flat index = j1 * N + j2.
struct PeriodicGrid {
    int d = 1;
    int N = 0;
    double L = 2.0 * std::numbers::pi;

    std::size_t size() const {
        return d == 1 ? static_cast<std::size_t>(N)
                      : static_cast<std::size_t>(N) * N;
    }
    double dx() const { return L / N; }

    Vec node(std::size_t idx) const {
        if (d == 1) return {static_cast<double>(idx) * dx(), 0.0};
        return {static_cast<double>(idx / N) * dx(),
                static_cast<double>(idx % N) * dx()};
    }

    /// Signed integer frequency of DFT bin m in [0, N).
    int k_of(int m) const { return m <= N / 2 - 1 ? m : m - N; }

    double xi_of_k(int k) const {
        return 2.0 * std::numbers::pi * static_cast<double>(k) / L;
    }

    /// Integer frequency vector of a flat spectral index.
    std::array<int, 2> kvec(std::size_t idx) const {
        if (d == 1) return {k_of(static_cast<int>(idx)), 0};
        return {k_of(static_cast<int>(idx / N)),
                k_of(static_cast<int>(idx % N))};
    }

    Vec xi(std::size_t idx) const {
        auto k = kvec(idx);
        return {xi_of_k(k[0]), d == 2 ? xi_of_k(k[1]) : 0.0};
    }

    bool operator==(const PeriodicGrid&) const = default;
};

inline void validate(const PeriodicGrid& g) {
    if (g.d != 1 && g.d != 2) throw Error("grid: d must be 1 or 2");
    if (!is_power_of_two(static_cast<std::size_t>(g.N)))
        throw Error("grid: N must be a power of two");
    if (!(g.L > 0.0)) throw Error("grid: L must be positive");
}

/// A complex scalar field sampled on a periodic grid.
struct GridFunction {
    PeriodicGrid grid;
    std::vector<cplx> values;
};

inline GridFunction zero_function(const PeriodicGrid& g) {
    return {g, std::vector<cplx>(g.size(), cplx(0.0, 0.0))};
}

/// Normalized Fourier coefficients: u_j = sum_k hat_k e^{i xi_k . x_j}.
inline std::vector<cplx> fft_hat(const GridFunction& u) {
    if (u.grid.d == 1) return dft_forward(u.values);
    return dft2_forward(u.values, static_cast<std::size_t>(u.grid.N));
}

inline GridFunction from_hat(const PeriodicGrid& g, std::vector<cplx> hat) {
    if (g.d == 1) return {g, dft_inverse(std::move(hat))};
    return {g, dft2_inverse(std::move(hat), static_cast<std::size_t>(g.N))};
}

/// Zero all modes with any |k_i| > kmax (sharp projector, used both for
/// dealiasing and for band-limiting initial data).
inline void band_limit_hat(std::vector<cplx>& hat, const PeriodicGrid& g,
                           int kmax) {
    for (std::size_t idx = 0; idx < hat.size(); ++idx) {
        auto k = g.kvec(idx);
        if (std::abs(k[0]) > kmax || std::abs(k[1]) > kmax)
            hat[idx] = cplx(0.0, 0.0);
    }
}

inline GridFunction band_limit(const GridFunction& u, int kmax) {
    auto hat = fft_hat(u);
    band_limit_hat(hat, u.grid, kmax);
    return from_hat(u.grid, std::move(hat));
}

/// Largest retained frequency index under the 2/3-rule used throughout.
inline int dealias_kmax(const PeriodicGrid& g) { return g.N / 3; }

/// Trigonometric interpolant: evaluates the band-limited extension of a grid
/// function at arbitrary (off-grid) points. Exact on grid nodes.
struct TrigInterpolant {
    PeriodicGrid grid;
    std::vector<cplx> hat;

    explicit TrigInterpolant(const GridFunction& u)
        : grid(u.grid), hat(fft_hat(u)) {}

    cplx operator()(Vec y) const {
        cplx s = 0.0;
        for (std::size_t idx = 0; idx < hat.size(); ++idx) {
            if (hat[idx] == cplx(0.0, 0.0)) continue;
            Vec xi = grid.xi(idx);
            double th = dot(xi, y);
            s += hat[idx] * cplx(std::cos(th), std::sin(th));
        }
        return s;
    }
};

/// Discrete Sobolev norm sqrt( L^d sum_k (1+|xi_k|^2)^s |hat_k|^2 ).
/// The L^d factor makes s = 0 agree with the continuum L^2 norm.
inline double sobolev_norm(const GridFunction& u, double s) {
    auto hat = fft_hat(u);
    std::vector<double> terms(hat.size());
    for (std::size_t idx = 0; idx < hat.size(); ++idx) {
        Vec xi = u.grid.xi(idx);
        double w = std::pow(1.0 + dot(xi, xi), s);
        terms[idx] = w * std::norm(hat[idx]);
    }
    double Ld = std::pow(u.grid.L, u.grid.d);
    return std::sqrt(Ld * pairwise_sum(terms));
}

/// Plain L^2 norm (s = 0) without the spectral detour.
inline double l2_norm(const GridFunction& u) {
    std::vector<double> terms(u.values.size());
    for (std::size_t i = 0; i < u.values.size(); ++i)
        terms[i] = std::norm(u.values[i]);
    double Ld = std::pow(u.grid.L, u.grid.d);
    return std::sqrt(Ld * pairwise_sum(terms) /
                     static_cast<double>(u.values.size()));
}

inline double linf_distance(const GridFunction& a, const GridFunction& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        m = std::max(m, std::abs(a.values[i] - b.values[i]));
    return m;
}

inline double l2_distance(const GridFunction& a, const GridFunction& b) {
    GridFunction d = a;
    for (std::size_t i = 0; i < d.values.size(); ++i)
        d.values[i] -= b.values[i];
    return l2_norm(d);
}

} // namespace wavelab::spde
