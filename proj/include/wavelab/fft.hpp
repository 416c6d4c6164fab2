#pragma once

#include <numbers>
#include <vector>

#include "wavelab/errors.hpp"
#include "wavelab/numerics.hpp"

namespace wavelab {

/// In-place iterative radix-2 FFT. sign = -1 gives the forward transform
/// X_k = sum_j x_j e^{-2 pi i jk/N}; sign = +1 the unnormalized inverse.
/// Hand-rolled rather than linked: grids here are always powers of two and
/// small, and a fixed implementation keeps outputs bit-reproducible (library
/// planners may pick different kernels run to run).
inline void fft_radix2(std::vector<cplx>& a, int sign) {
    const std::size_t n = a.size();
    if (!is_power_of_two(n)) throw Error("fft: size must be a power of two");
    // Bit-reversal permutation.
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
        cplx wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                cplx u = a[i + j];
                cplx v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

/// Forward DFT with the 1/N^d normalization used throughout: returns
/// coefficients c_k with x_j = sum_k c_k e^{+2 pi i jk/N}.
inline std::vector<cplx> dft_forward(std::vector<cplx> a) {
    fft_radix2(a, -1);
    double inv = 1.0 / static_cast<double>(a.size());
    for (auto& z : a) z *= inv;
    return a;
}

/// Inverse of dft_forward.
inline std::vector<cplx> dft_inverse(std::vector<cplx> c) {
    fft_radix2(c, +1);
    return c;
}

/// Row-column 2-D transforms on an N x N array in row-major order
/// (index = j1 * N + j2). Same normalization convention: forward divides
/// by N^2.
inline void fft2_radix2(std::vector<cplx>& a, std::size_t N, int sign) {
    if (a.size() != N * N) throw Error("fft2: size mismatch");
    std::vector<cplx> tmp(N);
    for (std::size_t r = 0; r < N; ++r) { // rows
        for (std::size_t c = 0; c < N; ++c) tmp[c] = a[r * N + c];
        fft_radix2(tmp, sign);
        for (std::size_t c = 0; c < N; ++c) a[r * N + c] = tmp[c];
    }
    for (std::size_t c = 0; c < N; ++c) { // columns
        for (std::size_t r = 0; r < N; ++r) tmp[r] = a[r * N + c];
        fft_radix2(tmp, sign);
        for (std::size_t r = 0; r < N; ++r) a[r * N + c] = tmp[r];
    }
}

inline std::vector<cplx> dft2_forward(std::vector<cplx> a, std::size_t N) {
    fft2_radix2(a, N, -1);
    double inv = 1.0 / static_cast<double>(N * N);
    for (auto& z : a) z *= inv;
    return a;
}

inline std::vector<cplx> dft2_inverse(std::vector<cplx> c, std::size_t N) {
    fft2_radix2(c, N, +1);
    return c;
}

} // namespace wavelab
