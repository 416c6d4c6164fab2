#pragma once

#include <cmath>
#include <vector>

#include "wavelab/errors.hpp"
#include "wavelab/grid.hpp"
#include "wavelab/symbol.hpp"

namespace wavelab::spde {

using symbols::SymbolField;

namespace detail {

/// Low-frequency excision applied when quantizing symbols that are merely
/// homogeneous (|xi| and friends): modes with |xi| <= 1/2 are dropped, modes
/// with |xi| >= 1 pass unchanged. Symbols polynomial in xi are entire and
/// are quantized exactly instead — cutting them off would freeze the long
/// wavelengths on large domains.
inline double origin_cutoff(const SymbolField& sym, Vec xi) {
    if (sym.homogeneous && !sym.polynomial_in_xi)
        return 1.0 - smooth_cutoff(2.0 * norm(xi));
    return 1.0;
}

inline std::size_t direct_limit(int d) { return d == 1 ? 4096 : 256; }

} // namespace detail

/// Kohn-Nirenberg quantization on the grid:
///   (Op(a) u)(x_j) = sum_k a(t, x_j, xi_k) hat_u_k e^{i xi_k . x_j}.
/// Dispatches to a pure Fourier-multiplier path when the symbol is
/// x-independent, to a separable sum of multiplier/coefficient products when
/// available, and to the direct O(N^{2d}) formula otherwise.
inline GridFunction apply_pdo(const SymbolField& a, double t,
                              const GridFunction& u) {
    const PeriodicGrid& g = u.grid;
    if (a.dim != g.d) throw Error("apply_pdo: dimension mismatch");
    if (static_cast<std::size_t>(g.N) > detail::direct_limit(g.d))
        throw GridTooLarge("apply_pdo: N = " + std::to_string(g.N) +
                           " exceeds the quantization budget for d = " +
                           std::to_string(g.d));
    auto hat = fft_hat(u);

    if (a.x_independent) {
        for (std::size_t idx = 0; idx < hat.size(); ++idx) {
            Vec xi = g.xi(idx);
            hat[idx] *= a.value(t, {0.0, 0.0}, xi) *
                        detail::origin_cutoff(a, xi);
        }
        return from_hat(g, std::move(hat));
    }

    if (!a.separable.empty()) {
        GridFunction out = zero_function(g);
        for (const auto& term : a.separable) {
            auto part = hat;
            for (std::size_t idx = 0; idx < part.size(); ++idx) {
                Vec xi = g.xi(idx);
                part[idx] *= term.mult(t, xi) * detail::origin_cutoff(a, xi);
            }
            GridFunction phys = from_hat(g, std::move(part));
            for (std::size_t j = 0; j < phys.values.size(); ++j)
                out.values[j] += term.coeff(t, g.node(j)) * phys.values[j];
        }
        return out;
    }

    // Direct quantization. e^{i xi_k . x_j} reduces to integer powers of the
    // N-th root of unity, read from one precomputed table.
    const int N = g.N;
    std::vector<cplx> omega(N);
    for (int m = 0; m < N; ++m) {
        double th = 2.0 * std::numbers::pi * static_cast<double>(m) / N;
        omega[m] = cplx(std::cos(th), std::sin(th));
    }
    GridFunction out = zero_function(g);
    std::vector<double> cut(hat.size());
    std::vector<std::array<int, 2>> kv(hat.size());
    for (std::size_t idx = 0; idx < hat.size(); ++idx) {
        cut[idx] = detail::origin_cutoff(a, g.xi(idx));
        kv[idx] = g.kvec(idx);
    }
    for (std::size_t j = 0; j < out.values.size(); ++j) {
        Vec x = g.node(j);
        long j1 = g.d == 1 ? static_cast<long>(j) : static_cast<long>(j / N);
        long j2 = g.d == 1 ? 0 : static_cast<long>(j % N);
        cplx s = 0.0;
        for (std::size_t idx = 0; idx < hat.size(); ++idx) {
            if (hat[idx] == cplx(0.0, 0.0) || cut[idx] == 0.0) continue;
            long phase = (kv[idx][0] * j1 + kv[idx][1] * j2) % N;
            if (phase < 0) phase += N;
            s += a.value(t, x, g.xi(idx)) * cut[idx] * hat[idx] *
                 omega[static_cast<std::size_t>(phase)];
        }
        out.values[j] = s;
    }
    return out;
}

} // namespace wavelab::spde
