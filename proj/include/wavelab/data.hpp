#pragma once

#include <cmath>

#include "wavelab/grid.hpp"

namespace wavelab::spde {

/// Initial data library. Every constructor tapers its sample smoothly to
/// zero across radial frequencies [N/4, N/3], so data are admissible solver
/// inputs as-is (inside the sharp N/3 dealiasing band) AND spectrally smooth
/// at their own resolution edge: a sharp truncation would leave ringing
/// concentrated at k = N/3 that the wave front detector, whose analysis band
/// must end below the data band for exactly this reason, would otherwise
/// read as a spurious singularity at every window.
/// Singular shapes keep exactly one singular point (or line) per period.

/// Smooth radial roll-off: modes with |k| <= N/4 pass untouched, the band
/// [N/4, N/3] fades with a C-infinity profile, everything above is zero.
inline GridFunction taper_band(const GridFunction& u) {
    const PeriodicGrid& g = u.grid;
    auto hat = fft_hat(u);
    const double lo = g.N / 4.0, hi = g.N / 3.0;
    for (std::size_t idx = 0; idx < hat.size(); ++idx) {
        auto kv = g.kvec(idx);
        double kn = std::hypot(static_cast<double>(kv[0]),
                               static_cast<double>(kv[1]));
        if (kn <= lo) continue;
        if (kn >= hi) {
            hat[idx] = cplx(0.0, 0.0);
            continue;
        }
        hat[idx] *= smooth_cutoff(1.0 + (kn - lo) / (hi - lo));
    }
    return from_hat(g, std::move(hat));
}

namespace detail {

/// Centered sawtooth: frac((x - x0)/L) - 1/2; one unit jump at x0.
inline double sawtooth(double x, double x0, double L) {
    double f = mod_pos(x - x0, L) / L;
    return f - 0.5;
}

} // namespace detail

/// Smooth periodic Gaussian bump (min-image distance).
inline GridFunction make_gaussian(const PeriodicGrid& g, Vec center,
                                  double width) {
    GridFunction u = zero_function(g);
    for (std::size_t j = 0; j < u.values.size(); ++j) {
        Vec x = g.node(j);
        double r2 = 0.0;
        for (int i = 0; i < g.d; ++i) {
            double di = periodic_diff(x[i], center[i], g.L);
            r2 += di * di;
        }
        u.values[j] = std::exp(-r2 / (2.0 * width * width));
    }
    return taper_band(u);
}

/// Piecewise-linear profile with a single unit jump at x0 (d = 1). Its
/// spectrum decays like 1/k, the model of a conormal jump singularity.
inline GridFunction make_step(const PeriodicGrid& g, double x0) {
    GridFunction u = zero_function(g);
    for (std::size_t j = 0; j < u.values.size(); ++j)
        u.values[j] = detail::sawtooth(g.node(j)[0], x0, g.L);
    return taper_band(u);
}

/// Continuous profile with a single slope break at x0 (d = 1); spectrum
/// decays like 1/k^2.
inline GridFunction make_kink(const PeriodicGrid& g, double x0) {
    GridFunction u = zero_function(g);
    for (std::size_t j = 0; j < u.values.size(); ++j) {
        double r = mod_pos(g.node(j)[0] - x0, g.L);
        u.values[j] = r * (g.L - r) / (g.L * g.L);
    }
    return taper_band(u);
}

/// Complex exponential e^{i k . x} (exercises fully smooth, fully
/// one-sided spectra).
inline GridFunction make_plane_wave(const PeriodicGrid& g,
                                    std::array<int, 2> k) {
    GridFunction u = zero_function(g);
    for (std::size_t j = 0; j < u.values.size(); ++j) {
        Vec x = g.node(j);
        double th = g.xi_of_k(k[0]) * x[0] + g.xi_of_k(k[1]) * x[1];
        u.values[j] = cplx(std::cos(th), std::sin(th));
    }
    return taper_band(u);
}

/// Jump across the line x1 = a, smoothly modulated along x2 with an
/// amplitude bounded away from zero (d = 2).
inline GridFunction make_line_singularity(const PeriodicGrid& g, double a) {
    GridFunction u = zero_function(g);
    for (std::size_t j = 0; j < u.values.size(); ++j) {
        Vec x = g.node(j);
        double amp =
            1.0 + 0.5 * std::cos(2.0 * std::numbers::pi * x[1] / g.L);
        u.values[j] = amp * detail::sawtooth(x[0], a, g.L);
    }
    return taper_band(u);
}

} // namespace wavelab::spde
