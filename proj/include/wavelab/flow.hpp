#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "wavelab/brownian.hpp"
#include "wavelab/errors.hpp"
#include "wavelab/numerics.hpp"
#include "wavelab/rng.hpp"
#include "wavelab/symbol.hpp"

namespace wavelab::flows {

using symbols::SymbolField;

struct PhasePoint {
    Vec x{0.0, 0.0};
    Vec xi{0.0, 0.0};
};

struct FlowTrajectory {
    std::vector<double> times;
    std::vector<PhasePoint> states; // n_steps + 1 entries
    const PhasePoint& terminal() const { return states.back(); }
};

namespace detail {

constexpr double kBlowUpRadius = 1e12;

inline void check_finite(const PhasePoint& p, std::size_t step) {
    double r = norm(p.x) + norm(p.xi);
    if (!(r <= kBlowUpRadius))
        throw BlowUp("flow: left the safety ball at step " +
                     std::to_string(step));
}

/// One Stratonovich-Heun step: Euler predictor, trapezoidal corrector for
/// both the diffusion and the drift field.
inline PhasePoint heun_step(const symbols::HamiltonianFields& hf,
                            const PhasePoint& s, double t0, double t1,
                            double dw, double dt) {
    auto [fx, fxi] = hf.diffusion.eval(t0, s.x, s.xi);
    auto [gx, gxi] = hf.drift.eval(t0, s.x, s.xi);
    PhasePoint pred{s.x + dw * fx + dt * gx, s.xi + dw * fxi + dt * gxi};
    auto [fx2, fxi2] = hf.diffusion.eval(t1, pred.x, pred.xi);
    auto [gx2, gxi2] = hf.drift.eval(t1, pred.x, pred.xi);
    return {s.x + (0.5 * dw) * (fx + fx2) + (0.5 * dt) * (gx + gx2),
            s.xi + (0.5 * dw) * (fxi + fxi2) + (0.5 * dt) * (gxi + gxi2)};
}

} // namespace detail

/// Integrate the stochastic bicharacteristic system
///   dx  =  d_xi a1 o dw + d_xi b1 dt,
///   dxi = -d_x  a1 o dw - d_x  b1 dt
/// along the given Brownian path with the Stratonovich-Heun scheme.
inline FlowTrajectory integrate_flow(const SymbolField& a1,
                                     const SymbolField& b1,
                                     const BrownianPath& w,
                                     const PhasePoint& p0) {
    if (norm(p0.xi) == 0.0)
        throw ZeroFrequency("integrate_flow: xi0 must be non-zero");
    auto hf = symbols::hamiltonian_fields(a1, b1);
    const double dt = w.dt();
    FlowTrajectory traj;
    traj.times.reserve(w.n_steps + 1);
    traj.states.reserve(w.n_steps + 1);
    traj.times.push_back(0.0);
    traj.states.push_back(p0);
    PhasePoint s = p0;
    for (std::size_t i = 0; i < w.n_steps; ++i) {
        s = detail::heun_step(hf, s, w.time(i), w.time(i + 1),
                              w.increments[i], dt);
        detail::check_finite(s, i + 1);
        traj.times.push_back(w.time(i + 1));
        traj.states.push_back(s);
    }
    return traj;
}

/// The Ito-Stratonovich correction drift of the diffusion Hamiltonian field,
/// i.e. (1/2)(DF)F with F = (d_xi a, -d_x a):
///   corr_x_i  =  1/2 sum_j ( d_x_j d_xi_i a d_xi_j a - d_xi_j d_xi_i a d_x_j a )
///   corr_xi_i = -1/2 sum_j ( d_x_j d_x_i a d_xi_j a - d_xi_j d_x_i a d_x_j a )
inline std::pair<Vec, Vec> ito_correction(const SymbolField& a1, double t,
                                          const PhasePoint& p) {
    Vec cx{0.0, 0.0}, cxi{0.0, 0.0};
    for (int i = 0; i < a1.dim; ++i) {
        MultiIndex ei{0, 0};
        ei[i] = 1;
        double sx = 0.0, sxi = 0.0;
        for (int j = 0; j < a1.dim; ++j) {
            MultiIndex ej{0, 0};
            ej[j] = 1;
            double a_xj = symbols::eval_deriv(a1, {0, 0}, ej, t, p.x, p.xi).real();
            double a_xij = symbols::eval_deriv(a1, ei, ej, t, p.x, p.xi).real();
            double a_xixj = symbols::eval_deriv(
                a1, MultiIndex{ei[0] + ej[0], ei[1] + ej[1]}, {0, 0}, t, p.x,
                p.xi).real();
            double a_xi_j = symbols::eval_deriv(a1, ej, {0, 0}, t, p.x, p.xi).real();
            double a_xx = symbols::eval_deriv(
                a1, {0, 0}, MultiIndex{ei[0] + ej[0], ei[1] + ej[1]}, t, p.x,
                p.xi).real();
            sx += a_xij * a_xi_j - a_xixj * a_xj;
            sxi += a_xx * a_xi_j - a_xij * a_xj;
        }
        cx[i] = 0.5 * sx;
        cxi[i] = -0.5 * sxi;
    }
    return {cx, cxi};
}

/// Euler-Maruyama integration of the Ito form of the same system; the
/// correction drift above makes it converge to the Stratonovich flow.
inline FlowTrajectory integrate_flow_ito(const SymbolField& a1,
                                         const SymbolField& b1,
                                         const BrownianPath& w,
                                         const PhasePoint& p0) {
    if (norm(p0.xi) == 0.0)
        throw ZeroFrequency("integrate_flow_ito: xi0 must be non-zero");
    auto hf = symbols::hamiltonian_fields(a1, b1);
    const double dt = w.dt();
    FlowTrajectory traj;
    traj.times.push_back(0.0);
    traj.states.push_back(p0);
    PhasePoint s = p0;
    for (std::size_t i = 0; i < w.n_steps; ++i) {
        double t = w.time(i);
        auto [fx, fxi] = hf.diffusion.eval(t, s.x, s.xi);
        auto [gx, gxi] = hf.drift.eval(t, s.x, s.xi);
        auto [cx, cxi] = ito_correction(a1, t, s);
        s = {s.x + w.increments[i] * fx + dt * (gx + cx),
             s.xi + w.increments[i] * fxi + dt * (gxi + cxi)};
        detail::check_finite(s, i + 1);
        traj.times.push_back(w.time(i + 1));
        traj.states.push_back(s);
    }
    return traj;
}

/// Trace the bicharacteristic through (t, p) backwards to time 0, i.e.
/// evaluate Phi_t^{-1}(p). t must lie on the path's time grid.
inline PhasePoint inverse_flow(const SymbolField& a1, const SymbolField& b1,
                               const BrownianPath& w, double t,
                               const PhasePoint& p) {
    if (norm(p.xi) == 0.0)
        throw ZeroFrequency("inverse_flow: xi must be non-zero");
    auto hf = symbols::hamiltonian_fields(a1, b1);
    const double dt = w.dt();
    std::size_t k = detail::step_index_of(w, t);
    PhasePoint s = p;
    for (std::size_t i = k; i-- > 0;) {
        // Reverse the step from t_i to t_{i+1}: same fields, negated
        // increments, endpoint times swapped.
        s = detail::heun_step(hf, s, w.time(i + 1), w.time(i),
                              -w.increments[i], -dt);
        detail::check_finite(s, i);
    }
    return s;
}

/// How far the flow is from commuting with fibre dilations:
/// max over grid times of |x^lam - x| + |xi^lam - lam xi| / lam, where the
/// lam-trajectory starts at (x0, lam xi0).
struct HomogeneityReport {
    double lambda = 1.0;
    double deviation = 0.0;
};

inline HomogeneityReport homogeneity_check(const SymbolField& a1,
                                           const SymbolField& b1,
                                           const BrownianPath& w,
                                           const PhasePoint& p0,
                                           double lambda) {
    auto base = integrate_flow(a1, b1, w, p0);
    auto scaled = integrate_flow(a1, b1, w, {p0.x, lambda * p0.xi});
    double dev = 0.0;
    for (std::size_t i = 0; i < base.states.size(); ++i) {
        double dx = norm(scaled.states[i].x - base.states[i].x);
        double dxi =
            norm(scaled.states[i].xi - lambda * base.states[i].xi) / lambda;
        dev = std::max(dev, dx + dxi);
    }
    return {lambda, dev};
}

/// Monte Carlo moment estimates for the flow: E sup_t |x_t|^order and
/// E |xi_T|^order, with standard errors.
struct MomentReport {
    int order = 2;
    std::size_t n_paths = 0;
    double sup_x_moment = 0.0;
    double sup_x_stderr = 0.0;
    double xi_T_moment = 0.0;
    double xi_T_stderr = 0.0;
};

inline MomentReport moment_probe(const SymbolField& a1, const SymbolField& b1,
                                 std::uint64_t seed, std::size_t n_paths,
                                 double T, std::size_t n_steps,
                                 const PhasePoint& p0, int order = 2) {
    std::vector<double> supx(n_paths), xiT(n_paths);
    std::vector<double> supx2(n_paths), xiT2(n_paths);
    for (std::size_t m = 0; m < n_paths; ++m) {
        auto w = sample_brownian(subseed(seed, "moment-path", m), T, n_steps);
        auto traj = integrate_flow(a1, b1, w, p0);
        double sup = 0.0;
        for (const auto& s : traj.states) sup = std::max(sup, norm(s.x));
        supx[m] = std::pow(sup, order);
        xiT[m] = std::pow(norm(traj.terminal().xi), order);
        supx2[m] = supx[m] * supx[m];
        xiT2[m] = xiT[m] * xiT[m];
    }
    auto mean_se = [&](std::vector<double>& v, std::vector<double>& v2) {
        double M = static_cast<double>(n_paths);
        double mean = pairwise_sum(v) / M;
        double var = std::max(0.0, pairwise_sum(v2) / M - mean * mean);
        return std::make_pair(mean, std::sqrt(var / M));
    };
    MomentReport r;
    r.order = order;
    r.n_paths = n_paths;
    std::tie(r.sup_x_moment, r.sup_x_stderr) = mean_se(supx, supx2);
    std::tie(r.xi_T_moment, r.xi_T_stderr) = mean_se(xiT, xiT2);
    return r;
}

// ---------------------------------------------------------------------------
// Transported symbols: the solution of the conjugation hierarchy.
// ---------------------------------------------------------------------------

/// Principal transported symbol Q0(t) = q0 o Phi_t^{-1}; solves
/// dQ0 = -H_{a1} Q0 o dw - H_{b1} Q0 dt with Q0(0) = q0.
inline SymbolField transport_Q0(const SymbolField& a1, const SymbolField& b1,
                                const BrownianPath& w, const SymbolField& q0) {
    auto pa = std::make_shared<SymbolField>(a1);
    auto pb = std::make_shared<SymbolField>(b1);
    auto pq = std::make_shared<SymbolField>(q0);
    auto pw = std::make_shared<BrownianPath>(w);
    SymbolField out;
    out.name = "transport(" + q0.name + ")";
    out.dim = q0.dim;
    out.order = q0.order;
    out.homogeneous = q0.homogeneous;
    out.value = [pa, pb, pq, pw](double t, Vec x, Vec xi) {
        PhasePoint pre = inverse_flow(*pa, *pb, *pw, t, {x, xi});
        return pq->value(0.0, pre.x, pre.xi);
    };
    return out;
}

/// Value of the first corrector Q1 at (t, p) following the mild form of the
/// hierarchy: transport of q1 plus the Stratonovich integral of the
/// curvature remainder R1 along the bicharacteristic through (t, p),
///   R1 = (i/2)(d_xi^2 Q0 d_x^2 a1 - d_xi^2 a1 d_x^2 Q0).
/// The integral is discretized with the trapezoidal (Stratonovich) rule on
/// the path grid, reusing one stored forward trajectory.
inline cplx transport_Q1_value(const SymbolField& a1, const SymbolField& b1,
                               const BrownianPath& w, const SymbolField& q0,
                               const SymbolField& q1, double t,
                               const PhasePoint& p) {
    std::size_t k = detail::step_index_of(w, t);
    PhasePoint p0 = inverse_flow(a1, b1, w, t, p);

    // Forward trajectory tau -> Phi_tau(p0), tau on the first k grid times.
    auto hf = symbols::hamiltonian_fields(a1, b1);
    std::vector<PhasePoint> states(k + 1);
    states[0] = p0;
    for (std::size_t i = 0; i < k; ++i)
        states[i + 1] = detail::heun_step(hf, states[i], w.time(i),
                                          w.time(i + 1), w.increments[i],
                                          w.dt());

    SymbolField Q0 = transport_Q0(a1, b1, w, q0);
    auto R1 = [&](double tau, const PhasePoint& s) {
        cplx dxi2Q0 = symbols::eval_deriv(Q0, {2, 0}, {0, 0}, tau, s.x, s.xi);
        cplx dx2a = symbols::eval_deriv(a1, {0, 0}, {2, 0}, tau, s.x, s.xi);
        cplx dxi2a = symbols::eval_deriv(a1, {2, 0}, {0, 0}, tau, s.x, s.xi);
        cplx dx2Q0 = symbols::eval_deriv(Q0, {0, 0}, {2, 0}, tau, s.x, s.xi);
        return cplx(0.0, 0.5) * (dxi2Q0 * dx2a - dxi2a * dx2Q0);
    };

    cplx integral = 0.0;
    cplx prev = k > 0 ? R1(0.0, states[0]) : cplx(0.0, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        cplx next = R1(w.time(i + 1), states[i + 1]);
        integral += 0.5 * (prev + next) * w.increments[i];
        prev = next;
    }

    PhasePoint pre = p0;
    return q1.value(0.0, pre.x, pre.xi) + integral;
}

// ---------------------------------------------------------------------------
// Random symbol probe: path-dependent symbols stay in their class.
// ---------------------------------------------------------------------------

/// Builds the path-integrated random symbol
///   q(t, y) = int_0^t p0(Phi_tau(y)) o dw(tau)
/// (trapezoidal Stratonovich discretization, one stored trajectory per
/// evaluation point y = (x, xi)).
inline SymbolField random_transport_symbol(const SymbolField& a1,
                                           const SymbolField& b1,
                                           const BrownianPath& w,
                                           const SymbolField& p0sym,
                                           double t) {
    auto pa = std::make_shared<SymbolField>(a1);
    auto pb = std::make_shared<SymbolField>(b1);
    auto pp = std::make_shared<SymbolField>(p0sym);
    auto pw = std::make_shared<BrownianPath>(w);
    std::size_t k = detail::step_index_of(w, t);
    SymbolField out;
    out.name = "random(" + p0sym.name + ")";
    out.dim = p0sym.dim;
    out.order = p0sym.order;
    out.value = [pa, pb, pp, pw, k](double, Vec x, Vec xi) {
        auto hf = symbols::hamiltonian_fields(*pa, *pb);
        PhasePoint s{x, xi};
        cplx integral = 0.0;
        cplx prev = pp->value(0.0, s.x, s.xi);
        for (std::size_t i = 0; i < k; ++i) {
            s = detail::heun_step(hf, s, pw->time(i), pw->time(i + 1),
                                  pw->increments[i], pw->dt());
            cplx next = pp->value(pw->time(i + 1), s.x, s.xi);
            integral += 0.5 * (prev + next) * pw->increments[i];
            prev = next;
        }
        return integral;
    };
    return out;
}

struct RandomSymbolReport {
    std::uint64_t seed = 0;
    std::vector<symbols::SymbolClassEstimate> constants;
    double max_constant = 0.0;
    double max_drift = 0.0; // relative change under path refinement
    bool finite = true;
    bool stable = true; // max_drift below 10%
};

/// Estimate the symbol-class constants of the random symbol q for one seed
/// at resolution n_steps and at 2*n_steps (same underlying path by dyadic
/// coarsening), and report the drift between the two.
inline RandomSymbolReport random_symbol_probe(
    const SymbolField& a1, const SymbolField& b1, const SymbolField& p0sym,
    std::uint64_t seed, double T, std::size_t n_steps,
    const symbols::ProbeBox& K, int ab_max, std::span<const double> lambdas) {
    auto fine = sample_brownian(seed, T, 2 * n_steps);
    auto coarse = coarsen(fine, 2);

    auto qc = random_transport_symbol(a1, b1, coarse, p0sym, T);
    auto qf = random_transport_symbol(a1, b1, fine, p0sym, T);
    auto ec = symbols::symbol_class_probe(qc, K, ab_max, lambdas, T);
    auto ef = symbols::symbol_class_probe(qf, K, ab_max, lambdas, T);

    RandomSymbolReport r;
    r.seed = seed;
    r.constants = ef;
    for (std::size_t i = 0; i < ef.size(); ++i) {
        if (!std::isfinite(ef[i].constant_hat)) r.finite = false;
        r.max_constant = std::max(r.max_constant, ef[i].constant_hat);
        double scale = std::max({ec[i].constant_hat, ef[i].constant_hat, 1e-12});
        r.max_drift = std::max(
            r.max_drift,
            std::abs(ef[i].constant_hat - ec[i].constant_hat) / scale);
    }
    r.stable = r.finite && r.max_drift < 0.10;
    return r;
}

} // namespace wavelab::flows
