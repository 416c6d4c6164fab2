#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "wavelab/brownian.hpp"
#include "wavelab/errors.hpp"
#include "wavelab/grid.hpp"
#include "wavelab/pdo.hpp"
#include "wavelab/symbol.hpp"

namespace wavelab::spde {

using flows::BrownianPath;
using symbols::SymbolField;

struct SolverOptions {
    std::size_t frame_stride = 0; // 0: keep only the initial and final frame
    double growth_factor = 10.0;  // Instability fires beyond this multiple
};

struct SPDESolution {
    PeriodicGrid grid;
    std::string scheme;
    std::vector<double> times;        // times of stored frames
    std::vector<GridFunction> frames; // frames[0] is the initial datum
    std::uint64_t path_hash = 0;

    const GridFunction& terminal() const { return frames.back(); }
};

namespace detail {

inline bool keep_frame(std::size_t i, std::size_t n, std::size_t stride) {
    if (i == 0 || i == n) return true;
    return stride != 0 && i % stride == 0;
}

/// Sampled sup of |d^beta a(t, ., xi^)| over the spatial grid and unit
/// frequency directions; beta = 0 bounds the symbol itself, |beta| = 1 its
/// spatial Lipschitz constant (the hyperbolic L^2 growth rate).
inline double sampled_sup(const SymbolField& a, const PeriodicGrid& g,
                          double t, int dx_order) {
    double sup = 0.0;
    const int nx = 33;
    auto dirs = symbols::detail::sphere_directions(a.dim, 8);
    for (int i0 = 0; i0 < nx; ++i0) {
        Vec x{g.L * i0 / nx, 0.0};
        int n1 = a.dim == 2 ? nx : 1;
        for (int i1 = 0; i1 < n1; ++i1) {
            if (a.dim == 2) x[1] = g.L * i1 / nx;
            for (Vec dir : dirs) {
                for (int comp = 0; comp < (dx_order > 0 ? a.dim : 1); ++comp) {
                    MultiIndex beta{0, 0};
                    if (dx_order > 0) beta[comp] = dx_order;
                    sup = std::max(
                        sup, std::abs(symbols::eval_deriv(a, {0, 0}, beta, t,
                                                          x, dir)));
                }
            }
        }
    }
    return sup;
}

/// Sampled sup of |d_xi a| (transport speed), for the CFL-style heuristic.
inline double sampled_speed(const SymbolField& a, const PeriodicGrid& g,
                            double t) {
    double sup = 0.0;
    const int nx = 33;
    auto dirs = symbols::detail::sphere_directions(a.dim, 8);
    for (int i0 = 0; i0 < nx; ++i0) {
        Vec x{g.L * i0 / nx, 0.0};
        int n1 = a.dim == 2 ? nx : 1;
        for (int i1 = 0; i1 < n1; ++i1) {
            if (a.dim == 2) x[1] = g.L * i1 / nx;
            for (Vec dir : dirs) {
                Vec v{0.0, 0.0};
                for (int c = 0; c < a.dim; ++c) {
                    MultiIndex e{0, 0};
                    e[c] = 1;
                    v[c] = std::abs(
                        symbols::eval_deriv(a, e, {0, 0}, t, x, dir));
                }
                sup = std::max(sup, norm(v));
            }
        }
    }
    return sup;
}

} // namespace detail

/// Pathwise spectral solver for du = A u o dw + B u dt with A = -i Op(a),
/// B = -i Op(b) (the sign making a = -xi alpha(x) generate alpha(x) d_x).
/// Stratonovich-Heun stepping, 2/3-rule dealiasing after every stage, and an
/// explicit Instability guard: the accumulated L^2 growth must stay within
/// growth_factor times exp(S_a sum|dw| + S_b t), where S_a, S_b are sampled
/// sups of |d_x a|, |d_x b| on the unit sphere (the continuum hyperbolic
/// growth bound; a literal per-step bound would never fire, since runaway
/// modes compound slowly but relentlessly).
inline SPDESolution solve_spde(const SymbolField& a, const SymbolField& b,
                               const GridFunction& u0, const BrownianPath& w,
                               const SolverOptions& opts = {}) {
    const PeriodicGrid& g = u0.grid;
    validate(g);
    if (a.dim != g.d || b.dim != g.d)
        throw Error("solve_spde: symbol/grid dimension mismatch");

    const double dt = w.dt();
    double max_inc = 0.0;
    for (double dwi : w.increments) max_inc = std::max(max_inc, std::abs(dwi));

    // Stability heuristic (explicitly approximate; see module notes).
    double speed = std::max(detail::sampled_speed(a, g, 0.0),
                            detail::sampled_speed(b, g, 0.0));
    if (speed > 0.0 &&
        dt > g.L / (g.N * speed * std::max(1.0, max_inc)))
        throw Instability(
            "solve_spde: step size violates the transport stability "
            "heuristic; refine n_steps");

    const int kmax = dealias_kmax(g);
    GridFunction u = band_limit(u0, kmax);
    const double norm0 = std::max(l2_norm(u), 1e-300);

    SPDESolution sol;
    sol.grid = g;
    sol.scheme = "stratonovich_heun";
    sol.path_hash = flows::path_hash(w);
    sol.times.push_back(0.0);
    sol.frames.push_back(u);

    double S_a = detail::sampled_sup(a, g, 0.0, 1);
    double S_b = detail::sampled_sup(b, g, 0.0, 1);
    double sum_abs_dw = 0.0;

    const cplx mi(0.0, -1.0); // -i
    for (std::size_t i = 0; i < w.n_steps; ++i) {
        const double t0 = w.time(i), t1 = w.time(i + 1);
        const double dw = w.increments[i];

        auto au = apply_pdo(a, t0, u);
        auto bu = apply_pdo(b, t0, u);
        GridFunction pred = u;
        for (std::size_t j = 0; j < u.values.size(); ++j)
            pred.values[j] += mi * (dw * au.values[j] + dt * bu.values[j]);
        pred = band_limit(pred, kmax);

        auto au2 = apply_pdo(a, t1, pred);
        auto bu2 = apply_pdo(b, t1, pred);
        for (std::size_t j = 0; j < u.values.size(); ++j)
            u.values[j] += mi * (0.5 * dw * (au.values[j] + au2.values[j]) +
                                 0.5 * dt * (bu.values[j] + bu2.values[j]));
        u = band_limit(u, kmax);

        sum_abs_dw += std::abs(dw);
        double bound = opts.growth_factor *
                       std::exp(S_a * sum_abs_dw + S_b * t1);
        double growth = l2_norm(u) / norm0;
        if (!(growth <= bound))
            throw Instability("solve_spde: L2 growth " + std::to_string(growth) +
                              " exceeded the stability bound at step " +
                              std::to_string(i + 1) + " of " +
                              std::to_string(w.n_steps));

        if (detail::keep_frame(i + 1, w.n_steps, opts.frame_stride)) {
            sol.times.push_back(t1);
            sol.frames.push_back(u);
        }
    }
    return sol;
}

/// Smooth real coefficient field of a first-order differential operator.
struct CoefficientField {
    std::string name = "coefficient";
    std::function<double(double, Vec)> value; // (t, x)
};

inline CoefficientField constant_coefficient(double c) {
    return {"constant", [c](double, Vec) { return c; }};
}

/// Method-of-characteristics oracle for the transport case
/// a = -xi alpha(x), b = -xi beta(x): the solution is constant along the
/// stochastic characteristics dX = -alpha o dw - beta dt, so
/// u(t, x) = u0(chi_t^{-1}(x)), evaluated by trigonometric interpolation.
/// (The orientation is fixed by the constant-coefficient closed form
/// u(t,x) = u0(x + alpha0 w(t)).)
inline SPDESolution solve_characteristics(const CoefficientField& alpha,
                                          const CoefficientField& beta,
                                          const GridFunction& u0,
                                          const BrownianPath& w,
                                          const SolverOptions& opts = {}) {
    const PeriodicGrid& g = u0.grid;
    validate(g);
    TrigInterpolant interp(band_limit(u0, dealias_kmax(g)));

    SPDESolution sol;
    sol.grid = g;
    sol.scheme = "characteristics";
    sol.path_hash = flows::path_hash(w);
    sol.times.push_back(0.0);
    sol.frames.push_back(band_limit(u0, dealias_kmax(g)));

    if (g.d != 1) throw Error("solve_characteristics: d = 1 only");

    const double dt = w.dt();
    for (std::size_t k = 1; k <= w.n_steps; ++k) {
        if (!detail::keep_frame(k, w.n_steps, opts.frame_stride)) continue;
        GridFunction frame = zero_function(g);
        for (std::size_t j = 0; j < frame.values.size(); ++j) {
            // chi_t^{-1}(x_j): run the characteristic ODE backwards, which
            // flips the field signs (-alpha -> +alpha) against the reversed
            // increments.
            Vec y = g.node(j);
            for (std::size_t i = k; i-- > 0;) {
                double t0 = w.time(i + 1), t1 = w.time(i);
                double dwi = w.increments[i];
                Vec f0{alpha.value(t0, y), 0.0};
                Vec h0{beta.value(t0, y), 0.0};
                Vec pred = y + dwi * f0 + dt * h0;
                Vec f1{alpha.value(t1, pred), 0.0};
                Vec h1{beta.value(t1, pred), 0.0};
                y = y + (0.5 * dwi) * (f0 + f1) + (0.5 * dt) * (h0 + h1);
                if (!(std::abs(y[0]) <= 1e12))
                    throw BlowUp("solve_characteristics: characteristic left "
                                 "the safety ball at step " +
                                 std::to_string(i));
            }
            frame.values[j] = interp(y);
        }
        sol.times.push_back(w.time(k));
        sol.frames.push_back(std::move(frame));
    }
    return sol;
}

/// Backward-transport solve: integrates the adjoint evolution from time t
/// down to 0 over reversed increments with negated operators, so that
/// solve_backward(a, b, w, t, solve_spde(...).terminal()) recovers u0 up to
/// integrator tolerance.
inline GridFunction solve_backward(const SymbolField& a, const SymbolField& b,
                                   const BrownianPath& w, double t,
                                   const GridFunction& phi,
                                   const SolverOptions& opts = {}) {
    const PeriodicGrid& g = phi.grid;
    validate(g);
    std::size_t k = flows::detail::step_index_of(w, t);
    const double dt = w.dt();
    const int kmax = dealias_kmax(g);
    GridFunction u = band_limit(phi, kmax);
    const double norm0 = std::max(l2_norm(u), 1e-300);
    double S_a = detail::sampled_sup(a, g, 0.0, 1);
    double S_b = detail::sampled_sup(b, g, 0.0, 1);
    double sum_abs_dw = 0.0;

    const cplx pi_(0.0, 1.0); // +i: negated operators
    for (std::size_t i = k; i-- > 0;) {
        const double t0 = w.time(i + 1), t1 = w.time(i);
        const double dw = w.increments[i];

        auto au = apply_pdo(a, t0, u);
        auto bu = apply_pdo(b, t0, u);
        GridFunction pred = u;
        for (std::size_t j = 0; j < u.values.size(); ++j)
            pred.values[j] += pi_ * (dw * au.values[j] + dt * bu.values[j]);
        pred = band_limit(pred, kmax);

        auto au2 = apply_pdo(a, t1, pred);
        auto bu2 = apply_pdo(b, t1, pred);
        for (std::size_t j = 0; j < u.values.size(); ++j)
            u.values[j] += pi_ * (0.5 * dw * (au.values[j] + au2.values[j]) +
                                  0.5 * dt * (bu.values[j] + bu2.values[j]));
        u = band_limit(u, kmax);

        sum_abs_dw += std::abs(dw);
        double bound = opts.growth_factor *
                       std::exp(S_a * sum_abs_dw + S_b * (t - t1));
        double growth = l2_norm(u) / norm0;
        if (!(growth <= bound))
            throw Instability("solve_backward: L2 growth exceeded the "
                              "stability bound at step " +
                              std::to_string(i));
    }
    return u;
}

/// Discrete stochastic Fubini identity. With u(t) = int_0^t v o dw and
/// q(t) = w(t) p (p time-constant), the lemma asserts
///   Op(q(t)) u(t) = int_0^t Op(p) u o dw + int_0^t Op(q) v o dw.
/// Both sides are discretized with the same trapezoidal Stratonovich rule;
/// the returned value is the L^2 norm of their difference at time T. For
/// time-constant v the two sides telescope to identical sums and the
/// residual is pure round-off.
inline double stochastic_fubini_check(
    const SymbolField& p, const std::function<GridFunction(double)>& v,
    const BrownianPath& w) {
    const std::size_t n = w.n_steps;

    // u_i by trapezoidal accumulation of v o dw.
    GridFunction v_prev = v(0.0);
    const PeriodicGrid& g = v_prev.grid;
    std::vector<GridFunction> u(n + 1, zero_function(g));
    for (std::size_t i = 0; i < n; ++i) {
        GridFunction v_next = v(w.time(i + 1));
        u[i + 1] = u[i];
        for (std::size_t j = 0; j < g.size(); ++j)
            u[i + 1].values[j] += 0.5 * w.increments[i] *
                                  (v_prev.values[j] + v_next.values[j]);
        v_prev = std::move(v_next);
    }

    // Right-hand side: both integrals, same rule.
    GridFunction rhs = zero_function(g);
    GridFunction pu_prev = apply_pdo(p, 0.0, u[0]);
    GridFunction pv_prev = apply_pdo(p, 0.0, v(0.0));
    for (std::size_t i = 0; i < n; ++i) {
        GridFunction pu_next = apply_pdo(p, w.time(i + 1), u[i + 1]);
        GridFunction pv_next = apply_pdo(p, w.time(i + 1), v(w.time(i + 1)));
        for (std::size_t j = 0; j < g.size(); ++j) {
            cplx term1 = 0.5 * (pu_prev.values[j] + pu_next.values[j]);
            cplx term2 = 0.5 * (w.cumulative[i] * pv_prev.values[j] +
                                w.cumulative[i + 1] * pv_next.values[j]);
            rhs.values[j] += w.increments[i] * (term1 + term2);
        }
        pu_prev = std::move(pu_next);
        pv_prev = std::move(pv_next);
    }

    // Left-hand side: Op(q(T)) u(T) with q(T) = w(T) p.
    GridFunction lhs = apply_pdo(p, w.T, u[n]);
    double wT = w.cumulative[n];
    GridFunction diff = lhs;
    for (std::size_t j = 0; j < g.size(); ++j)
        diff.values[j] = wT * lhs.values[j] - rhs.values[j];
    return l2_norm(diff);
}

} // namespace wavelab::spde
