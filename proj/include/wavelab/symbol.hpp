#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wavelab/errors.hpp"
#include "wavelab/numerics.hpp"

namespace wavelab::symbols {

/// One term of a separable symbol sum_m c_m(t,x) * mu_m(t,xi). Symbols that
/// carry this decomposition get an O(N log N) quantization path.
struct SeparableTerm {
    std::function<cplx(double, Vec)> coeff; // (t, x)
    std::function<cplx(double, Vec)> mult;  // (t, xi)
};

/// A time-dependent symbol a(t, x, xi) on R^d x R^d, d in {1, 2}, together
/// with the structural facts the calculus and the quantizer rely on.
struct SymbolField {
    std::string name = "symbol";
    int dim = 1;
    double order = 1.0;           // class order m
    bool homogeneous = false;     // positively homogeneous of degree `order`
    bool polynomial_in_xi = false;// entire in xi: quantized with no origin cutoff
    bool x_independent = false;   // pure Fourier multiplier
    int analytic_order = -1;      // partials available up to this total order
    std::function<cplx(double, Vec, Vec)> value;
    // (alpha, beta, t, x, xi) -> d_xi^alpha d_x^beta a. Only consulted when
    // analytic_order >= |alpha| + |beta|.
    std::function<cplx(MultiIndex, MultiIndex, double, Vec, Vec)> partial;
    std::vector<SeparableTerm> separable;
};

namespace detail {

/// Step size for a nested central difference of total order k, balancing
/// truncation against rounding noise (~1e-15^(1/(k+2)); k = 1 gives the
/// canonical relative step 1e-5).
inline double fd_step(int k) {
    return std::pow(1e-15, 1.0 / static_cast<double>(k + 2));
}

inline cplx fd_eval(const SymbolField& sym, MultiIndex alpha, MultiIndex beta,
                    double t, Vec x, Vec xi, double h_scale) {
    if (order_of(alpha) == 0 && order_of(beta) == 0) return sym.value(t, x, xi);
    // Peel one derivative (xi components first) and recurse centrally.
    for (int i = 0; i < sym.dim; ++i) {
        if (alpha[i] > 0) {
            MultiIndex a2 = alpha;
            a2[i] -= 1;
            double h = h_scale * (1.0 + norm(xi));
            Vec xp = xi, xm = xi;
            xp[i] += h;
            xm[i] -= h;
            return (fd_eval(sym, a2, beta, t, x, xp, h_scale) -
                    fd_eval(sym, a2, beta, t, x, xm, h_scale)) /
                   (2.0 * h);
        }
    }
    for (int i = 0; i < sym.dim; ++i) {
        if (beta[i] > 0) {
            MultiIndex b2 = beta;
            b2[i] -= 1;
            double h = h_scale;
            Vec xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            return (fd_eval(sym, alpha, b2, t, xp, xi, h_scale) -
                    fd_eval(sym, alpha, b2, t, xm, xi, h_scale)) /
                   (2.0 * h);
        }
    }
    return sym.value(t, x, xi); // unreachable
}

} // namespace detail

/// Evaluate d_xi^alpha d_x^beta sym at (t, x, xi), using analytic partials
/// when the symbol provides them and nested central differences otherwise.
///
/// Throws ZeroFrequency when a homogeneous symbol is differentiated in xi at
/// xi = 0 (or evaluated there with negative order), and OrderExceeded when
/// finite differences would have to go beyond total order 4.
inline cplx eval_deriv(const SymbolField& sym, MultiIndex alpha,
                       MultiIndex beta, double t, Vec x, Vec xi) {
    for (int i = 0; i < 2; ++i) {
        if (alpha[i] < 0 || beta[i] < 0)
            throw Error("eval_deriv: negative multi-index");
        if (i >= sym.dim && (alpha[i] != 0 || beta[i] != 0))
            throw Error("eval_deriv: multi-index beyond symbol dimension");
    }
    if (sym.homogeneous && !sym.polynomial_in_xi && norm(xi) == 0.0 &&
        (order_of(alpha) >= 1 || sym.order < 0.0))
        throw ZeroFrequency("eval_deriv: homogeneous symbol at xi = 0");

    const int total = order_of(alpha) + order_of(beta);
    if (sym.partial && sym.analytic_order >= total)
        return sym.partial(alpha, beta, t, x, xi);
    if (total > 4)
        throw OrderExceeded("eval_deriv: finite differences capped at order 4");
    return detail::fd_eval(sym, alpha, beta, t, x, xi,
                           detail::fd_step(total));
}

/// Hamiltonian vector field of a scalar symbol: dx = d_xi a, dxi = -d_x a.
/// Returned as a callable on (t, x, xi); values are the real parts (the
/// principal symbols this is used with are real).
struct HamiltonianField {
    std::function<std::pair<Vec, Vec>(double, Vec, Vec)> eval;
};

struct HamiltonianFields {
    HamiltonianField diffusion; // from the noise symbol a1
    HamiltonianField drift;     // from the drift symbol b1
};

namespace detail {

inline HamiltonianField make_hamiltonian_field(SymbolField sym) {
    auto s = std::make_shared<SymbolField>(std::move(sym));
    HamiltonianField f;
    f.eval = [s](double t, Vec x, Vec xi) {
        Vec dx{0.0, 0.0}, dxi{0.0, 0.0};
        for (int i = 0; i < s->dim; ++i) {
            MultiIndex ei{0, 0};
            ei[i] = 1;
            dx[i] = eval_deriv(*s, ei, {0, 0}, t, x, xi).real();
            dxi[i] = -eval_deriv(*s, {0, 0}, ei, t, x, xi).real();
        }
        return std::make_pair(dx, dxi);
    };
    return f;
}

} // namespace detail

/// Build the diffusion/drift Hamiltonian fields of the principal symbols.
/// Both inputs must be real principal symbols, homogeneous of degree one.
inline HamiltonianFields hamiltonian_fields(const SymbolField& a1,
                                            const SymbolField& b1) {
    for (const auto* s : {&a1, &b1}) {
        if (!s->homogeneous || s->order != 1.0)
            throw Error("hamiltonian_fields: '" + s->name +
                        "' is not homogeneous of degree 1");
    }
    return {detail::make_hamiltonian_field(a1),
            detail::make_hamiltonian_field(b1)};
}

/// Poisson bracket {a, q} = sum_i (d_x_i a d_xi_i q - d_xi_i a d_x_i q).
inline SymbolField poisson_bracket(const SymbolField& a,
                                   const SymbolField& q) {
    if (a.dim != q.dim) throw Error("poisson_bracket: dimension mismatch");
    auto pa = std::make_shared<SymbolField>(a);
    auto pq = std::make_shared<SymbolField>(q);
    SymbolField out;
    out.name = "{" + a.name + "," + q.name + "}";
    out.dim = a.dim;
    out.order = a.order + q.order - 1.0;
    out.homogeneous = a.homogeneous && q.homogeneous;
    out.value = [pa, pq](double t, Vec x, Vec xi) {
        cplx s = 0.0;
        for (int i = 0; i < pa->dim; ++i) {
            MultiIndex ei{0, 0};
            ei[i] = 1;
            s += eval_deriv(*pa, {0, 0}, ei, t, x, xi) *
                     eval_deriv(*pq, ei, {0, 0}, t, x, xi) -
                 eval_deriv(*pa, ei, {0, 0}, t, x, xi) *
                     eval_deriv(*pq, {0, 0}, ei, t, x, xi);
        }
        return s;
    };
    return out;
}

/// A graded symbol expansion: term j has degree base_order - j.
struct SymbolExpansion {
    int dim = 1;
    double base_order = 0.0;
    std::vector<SymbolField> terms;
};

namespace detail {

inline std::vector<MultiIndex> multi_indices_of_order(int dim, int k) {
    std::vector<MultiIndex> out;
    if (dim == 1) {
        out.push_back({k, 0});
    } else {
        for (int k1 = 0; k1 <= k; ++k1) out.push_back({k1, k - k1});
    }
    return out;
}

inline double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

// i^n for integer n >= 0.
inline cplx ipow(int n) {
    switch (n & 3) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
    }
}

inline MultiIndex to_multi(int i0, int i1) { return {i0, i1}; }

} // namespace detail

/// Symbol expansion of the commutator [Op(Q), A] with A = -i Op(a), graded
/// by the standard composition asymptotics. Term of degree
/// (m_Q + m_a - 1) - n collects all contributions
///   c_alpha (d_xi^alpha Q_j' d_x^alpha a_j'' - d_xi^alpha a_j'' d_x^alpha Q_j')
/// with j' + j'' + |alpha| = n + 1, |alpha| >= 1, and
/// c_alpha = (-i)^{|alpha|+1} / alpha!. The leading (n = 0) term is the
/// Hamiltonian derivative H_a Q_0, i.e. the Poisson bracket {Q_0, a_1}.
inline SymbolExpansion commutator_expansion(const SymbolExpansion& Q,
                                            const SymbolExpansion& a,
                                            int n_terms) {
    if (Q.dim != a.dim)
        throw Error("commutator_expansion: dimension mismatch");
    if (n_terms < 1) throw Error("commutator_expansion: need n_terms >= 1");
    bool analytic = true;
    for (const auto& s : Q.terms)
        if (s.analytic_order < n_terms + 1) analytic = false;
    for (const auto& s : a.terms)
        if (s.analytic_order < n_terms + 1) analytic = false;
    if (!analytic && n_terms > 3)
        throw OrderExceeded(
            "commutator_expansion: more than 3 terms requires analytic "
            "partials on every input term");

    auto qs = std::make_shared<std::vector<SymbolField>>(Q.terms);
    auto as = std::make_shared<std::vector<SymbolField>>(a.terms);
    const int dim = Q.dim;

    SymbolExpansion out;
    out.dim = dim;
    out.base_order = Q.base_order + a.base_order - 1.0;
    for (int n = 0; n < n_terms; ++n) {
        SymbolField term;
        term.dim = dim;
        term.order = out.base_order - n;
        term.name = "commutator[" + std::to_string(n) + "]";
        bool homog = true;
        for (const auto& s : Q.terms) homog = homog && s.homogeneous;
        for (const auto& s : a.terms) homog = homog && s.homogeneous;
        term.homogeneous = homog;
        term.value = [qs, as, dim, n](double t, Vec x, Vec xi) {
            cplx sum = 0.0;
            for (int jq = 0; jq < static_cast<int>(qs->size()); ++jq) {
                for (int ja = 0; ja < static_cast<int>(as->size()); ++ja) {
                    int k = n + 1 - jq - ja; // |alpha|
                    if (k < 1) continue;
                    for (MultiIndex al : detail::multi_indices_of_order(dim, k)) {
                        cplx c = detail::ipow(3 * (k + 1)) / // (-i)^(k+1)
                                 (detail::factorial(al[0]) *
                                  detail::factorial(al[1]));
                        const SymbolField& Qj = (*qs)[jq];
                        const SymbolField& aj = (*as)[ja];
                        sum += c * (eval_deriv(Qj, al, {0, 0}, t, x, xi) *
                                        eval_deriv(aj, {0, 0}, al, t, x, xi) -
                                    eval_deriv(aj, al, {0, 0}, t, x, xi) *
                                        eval_deriv(Qj, {0, 0}, al, t, x, xi));
                    }
                }
            }
            return sum;
        };
        out.terms.push_back(std::move(term));
    }
    return out;
}

/// Excision cutoffs used to glue an expansion into a single symbol:
/// term j is multiplied by 1 - chi(eps_j |xi|).
struct CutoffChain {
    std::vector<double> epsilons; // non-increasing, one per term
    std::function<double(double)> chi = smooth_cutoff;
};

/// Borel-style gluing of finitely many expansion terms into one symbol.
inline SymbolField asymptotic_sum(const SymbolExpansion& expansion,
                                  const CutoffChain& chain) {
    if (chain.epsilons.size() < expansion.terms.size())
        throw Error("asymptotic_sum: need one epsilon per term");
    for (std::size_t j = 1; j < expansion.terms.size(); ++j)
        if (chain.epsilons[j] > chain.epsilons[j - 1])
            throw Error("asymptotic_sum: epsilons must be non-increasing");
    auto terms = std::make_shared<std::vector<SymbolField>>(expansion.terms);
    auto eps = chain.epsilons;
    auto chi = chain.chi;
    SymbolField out;
    out.dim = expansion.dim;
    out.order = expansion.base_order;
    out.name = "asymptotic_sum";
    out.value = [terms, eps, chi](double t, Vec x, Vec xi) {
        cplx s = 0.0;
        double r = norm(xi);
        for (std::size_t j = 0; j < terms->size(); ++j) {
            double w = 1.0 - chi(eps[j] * r);
            if (w != 0.0) s += w * (*terms)[j].value(t, x, xi);
        }
        return s;
    };
    return out;
}

/// Hoermander-class constant estimate for one derivative pair.
struct SymbolClassEstimate {
    MultiIndex alpha{0, 0};
    MultiIndex beta{0, 0};
    double constant_hat = 0.0; // sup |d^a d^b sym| (1+|xi|)^(|alpha| - m)
    bool stable = false;       // < 5% change under sample refinement
};

/// Spatial sampling box for the probe.
struct ProbeBox {
    Vec lo{0.0, 0.0};
    Vec hi{1.0, 0.0};
};

namespace detail {

inline std::vector<Vec> sphere_directions(int dim, int count) {
    std::vector<Vec> dirs;
    if (dim == 1) {
        dirs.push_back({1.0, 0.0});
        dirs.push_back({-1.0, 0.0});
    } else {
        for (int i = 0; i < count; ++i) {
            double th = 2.0 * std::numbers::pi * i / count;
            dirs.push_back({std::cos(th), std::sin(th)});
        }
    }
    return dirs;
}

inline double probe_sup(const SymbolField& sym, MultiIndex alpha,
                        MultiIndex beta, const ProbeBox& box,
                        std::span<const double> lambdas, double t, int nx,
                        int ndir) {
    double sup = 0.0;
    const double m = sym.order;
    const int k = order_of(alpha);
    for (Vec dir : sphere_directions(sym.dim, ndir)) {
        for (double lam : lambdas) {
            Vec xi = lam * dir;
            for (int i0 = 0; i0 < nx; ++i0) {
                Vec x{0.0, 0.0};
                x[0] = box.lo[0] +
                       (box.hi[0] - box.lo[0]) * i0 / std::max(1, nx - 1);
                int n1 = sym.dim == 2 ? nx : 1;
                for (int i1 = 0; i1 < n1; ++i1) {
                    if (sym.dim == 2)
                        x[1] = box.lo[1] + (box.hi[1] - box.lo[1]) * i1 /
                                               std::max(1, nx - 1);
                    double v = std::abs(eval_deriv(sym, alpha, beta, t, x, xi));
                    double ratio = v * std::pow(1.0 + norm(xi),
                                                static_cast<double>(k) - m);
                    sup = std::max(sup, ratio);
                }
            }
        }
    }
    return sup;
}

} // namespace detail

/// Empirically estimate the Hoermander-class constants of `sym` over the box
/// K for every derivative pair with |alpha| + |beta| <= ab_max, sampling xi
/// on dyadic shells lambda * S^{d-1}. An estimate is `stable` when doubling
/// the sampling density moves it by less than 5%.
inline std::vector<SymbolClassEstimate> symbol_class_probe(
    const SymbolField& sym, const ProbeBox& K, int ab_max,
    std::span<const double> lambdas, double t = 0.0) {
    std::vector<SymbolClassEstimate> out;
    for (int ka = 0; ka + 0 <= ab_max; ++ka) {
        for (int kb = 0; ka + kb <= ab_max; ++kb) {
            for (MultiIndex alpha : detail::multi_indices_of_order(sym.dim, ka)) {
                for (MultiIndex beta :
                     detail::multi_indices_of_order(sym.dim, kb)) {
                    double coarse = detail::probe_sup(sym, alpha, beta, K,
                                                      lambdas, t, 17, 16);
                    double fine = detail::probe_sup(sym, alpha, beta, K,
                                                    lambdas, t, 33, 32);
                    SymbolClassEstimate e;
                    e.alpha = alpha;
                    e.beta = beta;
                    e.constant_hat = fine;
                    e.stable =
                        std::abs(fine - coarse) <= 0.05 * std::max(fine, 1e-300);
                    out.push_back(e);
                }
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Symbol library.
// ---------------------------------------------------------------------------

/// a(x, xi) = <c, xi>: generator of constant-speed transport.
inline SymbolField constant_transport(std::vector<double> c) {
    int dim = static_cast<int>(c.size());
    if (dim < 1 || dim > 2) throw Error("constant_transport: need d in {1,2}");
    SymbolField s;
    s.name = "constant_transport";
    s.dim = dim;
    s.order = 1.0;
    s.homogeneous = true;
    s.polynomial_in_xi = true;
    s.x_independent = true;
    s.analytic_order = 99;
    Vec cv{c[0], dim == 2 ? c[1] : 0.0};
    s.value = [cv](double, Vec, Vec xi) { return cplx(dot(cv, xi), 0.0); };
    s.partial = [cv](MultiIndex a, MultiIndex b, double, Vec, Vec xi) -> cplx {
        if (order_of(b) > 0) return 0.0;
        if (order_of(a) == 0) return cplx(dot(cv, xi), 0.0);
        if (order_of(a) == 1) return cplx(a[0] == 1 ? cv[0] : cv[1], 0.0);
        return 0.0;
    };
    s.separable.push_back(
        {[](double, Vec) { return cplx(1.0, 0.0); },
         [cv](double, Vec xi) { return cplx(dot(cv, xi), 0.0); }});
    return s;
}

namespace detail {

// n-th derivative of c0 + c1 sin(x).
inline double sin_coeff_deriv(double c0, double c1, double x, int n) {
    switch (n & 3) {
        case 0: return n == 0 ? c0 + c1 * std::sin(x) : c1 * std::sin(x);
        case 1: return c1 * std::cos(x);
        case 2: return -c1 * std::sin(x);
        default: return -c1 * std::cos(x);
    }
}

} // namespace detail

/// a(x, xi) = (c0 + c1 sin x) xi in one dimension.
inline SymbolField variable_transport(double c0, double c1) {
    SymbolField s;
    s.name = "variable_transport";
    s.dim = 1;
    s.order = 1.0;
    s.homogeneous = true;
    s.polynomial_in_xi = true;
    s.analytic_order = 99;
    s.value = [c0, c1](double, Vec x, Vec xi) {
        return cplx((c0 + c1 * std::sin(x[0])) * xi[0], 0.0);
    };
    s.partial = [c0, c1](MultiIndex a, MultiIndex b, double, Vec x,
                         Vec xi) -> cplx {
        if (a[0] > 1) return 0.0;
        double coeff = detail::sin_coeff_deriv(c0, c1, x[0], b[0]);
        return cplx(a[0] == 1 ? coeff : coeff * xi[0], 0.0);
    };
    s.separable.push_back({[c0, c1](double, Vec x) {
                               return cplx(c0 + c1 * std::sin(x[0]), 0.0);
                           },
                           [](double, Vec xi) { return cplx(xi[0], 0.0); }});
    return s;
}

/// a(x, xi) = (c0 + c1 sin x) |xi| in one dimension: the half-wave symbol.
inline SymbolField halfwave(double c0, double c1) {
    SymbolField s;
    s.name = "halfwave";
    s.dim = 1;
    s.order = 1.0;
    s.homogeneous = true;
    s.polynomial_in_xi = false;
    s.analytic_order = 99;
    s.value = [c0, c1](double, Vec x, Vec xi) {
        return cplx((c0 + c1 * std::sin(x[0])) * std::abs(xi[0]), 0.0);
    };
    s.partial = [c0, c1](MultiIndex a, MultiIndex b, double, Vec x,
                         Vec xi) -> cplx {
        if (a[0] > 1) return 0.0; // away from xi = 0
        double coeff = detail::sin_coeff_deriv(c0, c1, x[0], b[0]);
        double xival = a[0] == 1 ? (xi[0] >= 0.0 ? 1.0 : -1.0)
                                 : std::abs(xi[0]);
        return cplx(coeff * xival, 0.0);
    };
    s.separable.push_back({[c0, c1](double, Vec x) {
                               return cplx(c0 + c1 * std::sin(x[0]), 0.0);
                           },
                           [](double, Vec xi) {
                               return cplx(std::abs(xi[0]), 0.0);
                           }});
    return s;
}

/// a(x, xi) = x xi: the dilation generator (exactly solvable flow).
inline SymbolField linear_phase() {
    SymbolField s;
    s.name = "linear_phase";
    s.dim = 1;
    s.order = 1.0;
    s.homogeneous = true;
    s.polynomial_in_xi = true;
    s.analytic_order = 99;
    s.value = [](double, Vec x, Vec xi) { return cplx(x[0] * xi[0], 0.0); };
    s.partial = [](MultiIndex a, MultiIndex b, double, Vec x, Vec xi) -> cplx {
        int ka = a[0], kb = b[0];
        if (ka == 0 && kb == 0) return cplx(x[0] * xi[0], 0.0);
        if (ka == 1 && kb == 0) return cplx(x[0], 0.0);
        if (ka == 0 && kb == 1) return cplx(xi[0], 0.0);
        if (ka == 1 && kb == 1) return cplx(1.0, 0.0);
        return 0.0;
    };
    s.separable.push_back({[](double, Vec x) { return cplx(x[0], 0.0); },
                           [](double, Vec xi) { return cplx(xi[0], 0.0); }});
    return s;
}

/// The zero symbol (declared homogeneous of degree 1 so it is accepted as a
/// principal symbol).
inline SymbolField zero_symbol(int dim = 1) {
    SymbolField s;
    s.name = "zero";
    s.dim = dim;
    s.order = 1.0;
    s.homogeneous = true;
    s.polynomial_in_xi = true;
    s.x_independent = true;
    s.analytic_order = 99;
    s.value = [](double, Vec, Vec) { return cplx(0.0, 0.0); };
    s.partial = [](MultiIndex, MultiIndex, double, Vec, Vec) {
        return cplx(0.0, 0.0);
    };
    s.separable.push_back({[](double, Vec) { return cplx(0.0, 0.0); },
                           [](double, Vec) { return cplx(0.0, 0.0); }});
    return s;
}

/// Wrap a plain function of (t, x, xi) as a SymbolField with FD derivatives.
inline SymbolField from_function(std::string name, int dim, double order,
                                 std::function<cplx(double, Vec, Vec)> f,
                                 bool homogeneous = false) {
    SymbolField s;
    s.name = std::move(name);
    s.dim = dim;
    s.order = order;
    s.homogeneous = homogeneous;
    s.value = std::move(f);
    return s;
}

} // namespace wavelab::symbols
