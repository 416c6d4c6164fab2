#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace wavelab {

using cplx = std::complex<double>;

/// Phase-space vectors are fixed-size pairs; dimension d in {1,2} is carried
/// by the surrounding object (grid / symbol). Unused component stays 0.
using Vec = std::array<double, 2>;

inline Vec operator+(Vec a, Vec b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Vec operator-(Vec a, Vec b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Vec operator*(double s, Vec a) { return {s * a[0], s * a[1]}; }

inline double norm(Vec a) { return std::hypot(a[0], a[1]); }

inline double dot(Vec a, Vec b) { return a[0] * b[0] + a[1] * b[1]; }

/// Multi-index for partial derivatives, one entry per space dimension.
using MultiIndex = std::array<int, 2>;

inline int order_of(MultiIndex a) { return a[0] + a[1]; }

/// Pairwise (cascade) summation: deterministic and far more accurate than a
/// running sum for the large Monte Carlo reductions used in moment probes.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    std::size_t half = v.size() / 2;
    return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

/// Least-squares slope of y against x.
inline double least_squares_slope(std::span<const double> x,
                                  std::span<const double> y) {
    std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        num += (x[i] - mx) * (y[i] - my);
        den += (x[i] - mx) * (x[i] - mx);
    }
    return num / den;
}

/// Observed convergence order from (step size, error) ladders, fitted in
/// log-log coordinates. Errors at round-off level are clamped first by the
/// caller; this routine just fits.
inline double observed_order(std::span<const double> h,
                             std::span<const double> err) {
    std::vector<double> lh(h.size()), le(err.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        lh[i] = std::log(h[i]);
        le[i] = std::log(err[i]);
    }
    return least_squares_slope(lh, le);
}

/// Reduce x into [0, L).
inline double mod_pos(double x, double L) {
    double r = std::fmod(x, L);
    if (r < 0.0) r += L;
    if (r >= L) r = 0.0; // tiny negative + L can round up to L itself
    return r;
}

/// Signed minimal-image difference a - b on the circle of circumference L,
/// in (-L/2, L/2].
inline double periodic_diff(double a, double b, double L) {
    double d = std::fmod(a - b, L);
    if (d <= -L / 2) d += L;
    if (d > L / 2) d -= L;
    return d;
}

/// Circular mean of positions on [0, L); robust to clusters that straddle
/// the periodic seam.
inline double circular_mean(std::span<const double> xs, double L) {
    double c = 0.0, s = 0.0;
    for (double x : xs) {
        double th = 2.0 * std::numbers::pi * x / L;
        c += std::cos(th);
        s += std::sin(th);
    }
    double th = std::atan2(s, c);
    return mod_pos(th * L / (2.0 * std::numbers::pi), L);
}

/// Smooth monotone ramp S : [0,1] -> [0,1] with all derivatives vanishing at
/// the endpoints (standard exp(-1/s) partition-of-unity construction).
inline double smooth_ramp(double s) {
    auto f = [](double t) { return t <= 0.0 ? 0.0 : std::exp(-1.0 / t); };
    double a = f(s), b = f(1.0 - s);
    return a / (a + b);
}

/// Smooth cutoff chi: identically 1 on |t| <= 1, identically 0 on |t| >= 2.
inline double smooth_cutoff(double t) {
    return smooth_ramp(2.0 - std::abs(t));
}

inline bool is_power_of_two(std::size_t n) {
    return n > 0 && (n & (n - 1)) == 0;
}

inline int int_log2(std::size_t n) {
    int l = 0;
    while ((std::size_t{1} << l) < n) ++l;
    return l;
}

} // namespace wavelab
