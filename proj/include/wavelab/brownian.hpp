#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "wavelab/errors.hpp"
#include "wavelab/numerics.hpp"
#include "wavelab/rng.hpp"

namespace wavelab::flows {

/// A sampled Brownian path on [0, T] with 2^k uniform steps. Increments are
/// the primary data; running sums are derived through a fixed dyadic
/// summation tree so that coarsening a path (pair-summing increments)
/// reproduces the surviving running sums *bit-exactly* — coarse and fine
/// discretizations of one driving path never disagree about shared times.
struct BrownianPath {
    std::uint64_t seed = 0;
    double T = 1.0;
    std::size_t n_steps = 0;
    std::vector<double> increments; // n_steps
    std::vector<double> cumulative; // n_steps + 1, cumulative[0] = 0

    double dt() const { return T / static_cast<double>(n_steps); }
    double time(std::size_t i) const {
        return T * static_cast<double>(i) / static_cast<double>(n_steps);
    }
};

namespace detail {

/// Dyadic block sums of the increments: level[l][j] covers
/// [j 2^l, (j+1) 2^l). Running sums are assembled MSB-first from these
/// blocks, which is what makes pair-sum coarsening exact.
inline std::vector<double> tree_cumulative(const std::vector<double>& inc) {
    const std::size_t n = inc.size();
    std::vector<std::vector<double>> level;
    level.push_back(inc);
    while (level.back().size() > 1) {
        const auto& prev = level.back();
        std::vector<double> next(prev.size() / 2);
        for (std::size_t j = 0; j < next.size(); ++j)
            next[j] = prev[2 * j] + prev[2 * j + 1];
        level.push_back(std::move(next));
    }
    const int top = static_cast<int>(level.size()) - 1;
    std::vector<double> cum(n + 1, 0.0);
    for (std::size_t i = 1; i <= n; ++i) {
        double s = 0.0;
        std::size_t pos = 0;
        for (int b = top; b >= 0; --b) {
            std::size_t w = std::size_t{1} << b;
            if (pos + w <= i) {
                s += level[b][pos >> b];
                pos += w;
            }
        }
        cum[i] = s;
    }
    return cum;
}

/// Index of t on the path's time grid (throws when t falls between steps).
inline std::size_t step_index_of(const BrownianPath& w, double t) {
    double k = t / w.dt();
    auto ki = static_cast<std::size_t>(std::llround(k));
    if (std::abs(k - static_cast<double>(ki)) > 1e-9 || ki > w.n_steps)
        throw Error("flow: time " + std::to_string(t) +
                    " is not on the path grid");
    return ki;
}

} // namespace detail

inline void validate_steps(std::size_t n_steps) {
    if (!is_power_of_two(n_steps))
        throw InvalidSteps("brownian: n_steps must be a positive power of two");
}

/// Draw a path from the named sub-stream "increments" of `seed`. Increment i
/// is the i-th normal of that stream scaled by sqrt(T/n); the draw is
/// random-access, so the same (seed, i) always yields the same increment no
/// matter what else was sampled.
inline BrownianPath sample_brownian(std::uint64_t seed, double T,
                                    std::size_t n_steps) {
    validate_steps(n_steps);
    if (!(T > 0.0)) throw Error("brownian: T must be positive");
    BrownianPath p;
    p.seed = seed;
    p.T = T;
    p.n_steps = n_steps;
    p.increments.resize(n_steps);
    const double sd = std::sqrt(T / static_cast<double>(n_steps));
    const std::uint64_t stream = subseed(seed, "increments");
    for (std::size_t i = 0; i < n_steps; ++i)
        p.increments[i] = sd * standard_normal(stream, i);
    p.cumulative = detail::tree_cumulative(p.increments);
    return p;
}

/// The deterministic limit w == 0 (for PDE sanity checks).
inline BrownianPath zero_path(double T, std::size_t n_steps) {
    validate_steps(n_steps);
    BrownianPath p;
    p.seed = 0;
    p.T = T;
    p.n_steps = n_steps;
    p.increments.assign(n_steps, 0.0);
    p.cumulative.assign(n_steps + 1, 0.0);
    return p;
}

/// Merge every `factor` consecutive increments (factor a power of two
/// dividing n_steps). Shared running sums are preserved bit-exactly and
/// coarsen(coarsen(p, a), b) == coarsen(p, a*b) to the last bit.
inline BrownianPath coarsen(const BrownianPath& p, std::size_t factor) {
    if (!is_power_of_two(factor) || factor > p.n_steps)
        throw InvalidFactor("coarsen: factor must be a power of two dividing "
                            "the step count");
    BrownianPath out;
    out.seed = p.seed;
    out.T = p.T;
    out.n_steps = p.n_steps / factor;
    out.increments = p.increments;
    for (std::size_t f = factor; f > 1; f /= 2) {
        std::vector<double> next(out.increments.size() / 2);
        for (std::size_t j = 0; j < next.size(); ++j)
            next[j] = out.increments[2 * j] + out.increments[2 * j + 1];
        out.increments = std::move(next);
    }
    out.cumulative = detail::tree_cumulative(out.increments);
    return out;
}

/// First `m` steps as a standalone path (m a power of two). Used to verify
/// that integrators are adapted: states up to step m depend on nothing
/// beyond the first m increments.
inline BrownianPath prefix(const BrownianPath& p, std::size_t m) {
    if (!is_power_of_two(m) || m > p.n_steps)
        throw InvalidSteps("prefix: need a power-of-two prefix length");
    BrownianPath out;
    out.seed = p.seed;
    out.T = p.T * static_cast<double>(m) / static_cast<double>(p.n_steps);
    out.n_steps = m;
    out.increments.assign(p.increments.begin(), p.increments.begin() + m);
    out.cumulative = detail::tree_cumulative(out.increments);
    return out;
}

// --------------------------------------------------------------------------
// Binary export / import. Fixed little-endian layout:
//   u64 seed | f64 T | u64 n_steps | f64 increments[n_steps]
// --------------------------------------------------------------------------

static_assert(std::endian::native == std::endian::little,
              "path files are little-endian; add byte swapping for this host");

inline void export_path(const BrownianPath& p, const std::string& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw Error("export_path: cannot open " + file);
    auto put = [&out](const void* ptr, std::size_t n) {
        out.write(static_cast<const char*>(ptr), static_cast<long>(n));
    };
    std::uint64_t n = p.n_steps;
    put(&p.seed, 8);
    put(&p.T, 8);
    put(&n, 8);
    put(p.increments.data(), 8 * p.increments.size());
    if (!out) throw Error("export_path: short write to " + file);
}

inline BrownianPath import_path(const std::string& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error("import_path: cannot open " + file);
    auto get = [&in, &file](void* ptr, std::size_t n) {
        in.read(static_cast<char*>(ptr), static_cast<long>(n));
        if (!in) throw Error("import_path: short read from " + file);
    };
    BrownianPath p;
    std::uint64_t n = 0;
    get(&p.seed, 8);
    get(&p.T, 8);
    get(&n, 8);
    validate_steps(n);
    p.n_steps = n;
    p.increments.resize(n);
    get(p.increments.data(), 8 * n);
    p.cumulative = detail::tree_cumulative(p.increments);
    return p;
}

/// Content hash of the binary layout (for manifests).
inline std::uint64_t path_hash(const BrownianPath& p) {
    std::uint64_t h = fnv1a(&p.seed, 8);
    h = fnv1a(&p.T, 8, h);
    std::uint64_t n = p.n_steps;
    h = fnv1a(&n, 8, h);
    h = fnv1a(p.increments.data(), 8 * p.increments.size(), h);
    return h;
}

} // namespace wavelab::flows
