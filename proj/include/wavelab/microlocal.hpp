#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "wavelab/brownian.hpp"
#include "wavelab/errors.hpp"
#include "wavelab/flow.hpp"
#include "wavelab/grid.hpp"
#include "wavelab/numerics.hpp"
#include "wavelab/symbol.hpp"

namespace wavelab::microlocal {

using flows::BrownianPath;
using spde::GridFunction;
using spde::PeriodicGrid;
using symbols::SymbolField;

/// Tuning of the windowed-FFT wave front detector. A sample point is read as
/// singular in a direction when the log-log decay slope of the windowed
/// spectrum over the analysis band beats `threshold` (slow decay). The band
/// edges scale with N so the slope readings are resolution-independent.
/// Defaults want N >= 64 in d = 1 and N >= 256 in d = 2 (below that the
/// 64-cell window no longer localizes within the period).
struct DetectorOptions {
    /// Window support radius in grid cells; 0 = 32 in d=1, 64 in d=2.
    /// A d=2 cone of half-angle 15 deg only resolves direction once the
    /// window main lobe is narrower than the cone: radius 32 smears a line
    /// discontinuity into the 22.5-deg neighbour cone, radius 64 does not.
    int window_cells = 0;
    int stride_cells = 0;     // candidate spacing; 0 = 1 in d=1, 16 in d=2
    double floor = 1e-14;     // log floor for individual shell maxima
    /// Cones whose loudest shell stays below this read as regular outright.
    /// Assumes O(1) data amplitudes: measured in-window singular content
    /// sits at 1e-4..1e-3, while far-field leakage (the Gevrey tail of the
    /// data taper seen through the window edge) stays below 1e-7.
    double active_floor = 1e-6;
    double threshold = -2.5;  // singular iff slope > threshold
    int n_dirs = 16;          // probe directions in d = 2
    double cone_half_angle_deg = 15.0;
    double sentinel_slope = -50.0; // reported for spectrally empty windows

    /// Analysis band [N/16, N/4]: the top stays strictly below the data
    /// roll-off at N/4 so the detector reads the singularity's own envelope,
    /// never the resolution edge of the discretization.
    int band_lo(int N) const { return N / 16; }
    int band_hi(int N) const { return N / 4; }
};

/// C^7 window profile cos^8(pi s / 2) on |s| < 1: its spectrum decays like
/// k^{-9}, so smooth data reads a slope near -9 over the analysis band --
/// far below the singularity threshold. (A C-infinity bump was rejected: its
/// exp(-c sqrt(k)) tail flattens to slope ~ -3.5 over the band, too close to
/// the threshold.)
inline double window_profile(double s) {
    double a = std::abs(s);
    if (a >= 1.0) return 0.0;
    double c = std::cos(0.5 * std::numbers::pi * a);
    double c2 = c * c;
    return c2 * c2 * c2 * c2;
}

/// Multiply by the radial window centred at `center` (min-image metric).
inline GridFunction apply_window(const GridFunction& u, Vec center,
                                 int window_cells) {
    const PeriodicGrid& g = u.grid;
    const double R = window_cells * g.dx();
    GridFunction out = u;
    for (std::size_t j = 0; j < out.values.size(); ++j) {
        Vec x = g.node(j);
        double r2 = 0.0;
        for (int i = 0; i < g.d; ++i) {
            double di = periodic_diff(x[i], center[i], g.L);
            r2 += di * di;
        }
        out.values[j] *= window_profile(std::sqrt(r2) / R);
    }
    return out;
}

inline std::vector<Vec> probe_directions(int d, int n_dirs) {
    return symbols::detail::sphere_directions(d, n_dirs);
}

/// Per-direction spectral shells: the analysis band's modes inside each
/// direction cone, bucketed by integer radius |k|. The slope is fit through
/// the per-shell maxima, which tracks the spectral envelope; fitting raw
/// bins would let the near-empty bins of a narrow 2-D cone drag the fit
/// towards "smooth". Built once per grid and reused across windows.
struct ConeBands {
    std::vector<Vec> dirs;
    // [dir][shell]: log radius and the flat spectral indices in the shell
    std::vector<std::vector<double>> shell_logr;
    std::vector<std::vector<std::vector<std::size_t>>> shell_idx;
};

inline ConeBands make_cone_bands(const PeriodicGrid& g,
                                 const DetectorOptions& opts = {}) {
    const int lo = opts.band_lo(g.N), hi = opts.band_hi(g.N);
    ConeBands bands;
    bands.dirs = probe_directions(g.d, opts.n_dirs);
    const std::size_t ndir = bands.dirs.size();
    const std::size_t nshell = hi >= lo ? static_cast<std::size_t>(hi - lo) + 1
                                        : 0;
    std::vector<std::vector<std::vector<std::size_t>>> buckets(
        ndir, std::vector<std::vector<std::size_t>>(nshell));
    const double cos_half =
        std::cos(opts.cone_half_angle_deg * std::numbers::pi / 180.0);
    for (std::size_t fid = 0; fid < g.size(); ++fid) {
        auto kv = g.kvec(fid);
        double kn = std::hypot(static_cast<double>(kv[0]),
                               static_cast<double>(kv[1]));
        long shell = std::lround(kn) - lo;
        if (shell < 0 || shell >= static_cast<long>(nshell)) continue;
        for (std::size_t di = 0; di < ndir; ++di) {
            double along = (kv[0] * bands.dirs[di][0] +
                            kv[1] * bands.dirs[di][1]) / kn;
            bool inside = g.d == 1 ? along > 0.0 : along >= cos_half;
            if (inside) buckets[di][static_cast<std::size_t>(shell)]
                .push_back(fid);
        }
    }
    bands.shell_logr.resize(ndir);
    bands.shell_idx.resize(ndir);
    for (std::size_t di = 0; di < ndir; ++di) {
        for (std::size_t s = 0; s < nshell; ++s) {
            if (buckets[di][s].empty()) continue;
            bands.shell_logr[di].push_back(
                std::log(static_cast<double>(lo) + static_cast<double>(s)));
            bands.shell_idx[di].push_back(std::move(buckets[di][s]));
        }
        if (bands.shell_logr[di].size() < 8)
            throw EmptyBand("detector: direction cone holds " +
                            std::to_string(bands.shell_logr[di].size()) +
                            " occupied shells; need N >= 64 (d=2: N >= 128)");
    }
    return bands;
}

/// Decay slope of one windowed spectrum along one cone: least-squares slope
/// of log(shell max) against log(shell radius).
inline double cone_slope(const std::vector<cplx>& hat, const ConeBands& bands,
                         std::size_t di, const DetectorOptions& opts) {
    const auto& shells = bands.shell_idx[di];
    std::vector<double> y(shells.size());
    double band_max = 0.0;
    for (std::size_t s = 0; s < shells.size(); ++s) {
        double m = 0.0;
        for (std::size_t b : shells[s]) m = std::max(m, std::abs(hat[b]));
        band_max = std::max(band_max, m);
        y[s] = std::log(std::max(m, opts.floor));
    }
    if (band_max <= opts.active_floor) return opts.sentinel_slope;
    return least_squares_slope(bands.shell_logr[di], y);
}

struct RaySlope {
    Vec dir{1.0, 0.0};
    double slope = 0.0;
};

/// All direction slopes at one window centre (one FFT, all cones).
struct SlopeProfile {
    Vec x{0.0, 0.0};
    std::vector<RaySlope> rays;
};

inline SlopeProfile slope_profile(const GridFunction& u, Vec center,
                                  const ConeBands& bands,
                                  const DetectorOptions& opts = {}) {
    int wc = opts.window_cells > 0 ? opts.window_cells
                                   : (u.grid.d == 1 ? 32 : 64);
    auto hat = spde::fft_hat(apply_window(u, center, wc));
    SlopeProfile prof;
    prof.x = center;
    for (std::size_t di = 0; di < bands.dirs.size(); ++di)
        prof.rays.push_back({bands.dirs[di], cone_slope(hat, bands, di, opts)});
    return prof;
}

/// One detected (or predicted) wave front ray.
struct WavefrontPoint {
    Vec x{0.0, 0.0};
    Vec dir{1.0, 0.0}; // unit frequency direction
    double slope = 0.0;
};

struct WavefrontSet {
    std::vector<WavefrontPoint> points;
};

/// Scan window centres on the stride lattice and report every ray whose
/// decay slope beats the threshold. The result is a plateau (every window
/// touching a singularity fires); reduce it with cluster_singular.
inline WavefrontSet detect_wavefront(const GridFunction& u,
                                     const DetectorOptions& opts = {}) {
    const PeriodicGrid& g = u.grid;
    ConeBands bands = make_cone_bands(g, opts);
    int stride = opts.stride_cells > 0 ? opts.stride_cells
                                       : (g.d == 1 ? 1 : 16);
    WavefrontSet wf;
    for (int j0 = 0; j0 < g.N; j0 += stride) {
        int n1 = g.d == 2 ? g.N : 1;
        for (int j1 = 0; j1 < n1; j1 += stride) {
            Vec c{j0 * g.dx(), g.d == 2 ? j1 * g.dx() : 0.0};
            SlopeProfile prof = slope_profile(u, c, bands, opts);
            for (const auto& ray : prof.rays)
                if (ray.slope > opts.threshold)
                    wf.points.push_back({c, ray.dir, ray.slope});
        }
    }
    return wf;
}

/// Collapse detection plateaus (d = 1): points sharing a direction whose
/// positions sit within `merge_gap` of their circular neighbour become one
/// point at the cluster's circular mean, keeping the shallowest slope.
inline WavefrontSet cluster_singular(const WavefrontSet& wf,
                                     const PeriodicGrid& g, double merge_gap) {
    WavefrontSet out;
    std::vector<bool> used(wf.points.size(), false);
    for (std::size_t i = 0; i < wf.points.size(); ++i) {
        if (used[i]) continue;
        Vec dir = wf.points[i].dir;
        std::vector<double> xs;
        double best_slope = -1e9;
        for (std::size_t j = i; j < wf.points.size(); ++j) {
            if (used[j] || dot(wf.points[j].dir, dir) < 1.0 - 1e-12) continue;
            xs.push_back(wf.points[j].x[0]);
            used[j] = true;
            best_slope = std::max(best_slope, wf.points[j].slope);
        }
        // All same-direction points collected; split them circularly.
        std::sort(xs.begin(), xs.end());
        const std::size_t n = xs.size();
        // Find the largest circular gap and start clustering after it.
        std::size_t start = 0;
        double biggest = xs[0] + g.L - xs[n - 1];
        for (std::size_t j = 1; j < n; ++j)
            if (xs[j] - xs[j - 1] > biggest) {
                biggest = xs[j] - xs[j - 1];
                start = j;
            }
        std::vector<double> cluster;
        auto flush = [&]() {
            if (cluster.empty()) return;
            double c = circular_mean(cluster, g.L);
            out.points.push_back({{c, 0.0}, dir, best_slope});
            cluster.clear();
        };
        for (std::size_t j = 0; j < n; ++j) {
            double x = xs[(start + j) % n];
            if (!cluster.empty()) {
                double gap = mod_pos(x - cluster.back(), g.L);
                if (gap > merge_gap) flush();
            }
            cluster.push_back(x);
        }
        flush();
    }
    return out;
}

/// Transport each ray along its stochastic bicharacteristic: positions move
/// with the x-flow, directions with the normalized xi-flow. Positions are
/// wrapped back into [0, L).
inline WavefrontSet push_forward_wf(const SymbolField& a1,
                                    const SymbolField& b1,
                                    const BrownianPath& w,
                                    const WavefrontSet& wf0,
                                    const PeriodicGrid& g) {
    WavefrontSet out;
    for (const auto& p : wf0.points) {
        flows::PhasePoint s{p.x, p.dir};
        flows::PhasePoint q = integrate_flow(a1, b1, w, s).terminal();
        double n = norm(q.xi);
        Vec dir{q.xi[0] / n, q.xi[1] / n};
        Vec x{mod_pos(q.x[0], g.L), g.d == 2 ? mod_pos(q.x[1], g.L) : 0.0};
        out.points.push_back({x, dir, p.slope});
    }
    return out;
}

/// Greedy matching between a predicted and a detected wave front set.
struct WFCompareReport {
    std::size_t matched = 0;
    std::size_t missing = 0;  // predicted rays with no detected partner
    std::size_t spurious = 0; // detected rays with no predicted partner
    double max_x_error = 0.0; // physical units, over matched pairs
    double max_angle_error_deg = 0.0;
    bool pass = false;
};

inline WFCompareReport compare_wf(const WavefrontSet& predicted,
                                  const WavefrontSet& detected,
                                  const PeriodicGrid& g, double x_tol,
                                  double angle_tol_deg) {
    WFCompareReport rep;
    std::vector<bool> taken(detected.points.size(), false);
    for (const auto& p : predicted.points) {
        std::size_t best = detected.points.size();
        double best_dist = 0.0, best_angle = 0.0;
        for (std::size_t j = 0; j < detected.points.size(); ++j) {
            if (taken[j]) continue;
            const auto& q = detected.points[j];
            double dx = std::hypot(periodic_diff(p.x[0], q.x[0], g.L),
                                   g.d == 2
                                       ? periodic_diff(p.x[1], q.x[1], g.L)
                                       : 0.0);
            double cosang = std::clamp(dot(p.dir, q.dir), -1.0, 1.0);
            double ang = std::acos(cosang) * 180.0 / std::numbers::pi;
            if (dx > x_tol || ang > angle_tol_deg) continue;
            if (best == detected.points.size() || dx < best_dist) {
                best = j;
                best_dist = dx;
                best_angle = ang;
            }
        }
        if (best == detected.points.size()) {
            ++rep.missing;
        } else {
            taken[best] = true;
            ++rep.matched;
            rep.max_x_error = std::max(rep.max_x_error, best_dist);
            rep.max_angle_error_deg =
                std::max(rep.max_angle_error_deg, best_angle);
        }
    }
    for (bool t : taken)
        if (!t) ++rep.spurious;
    rep.pass = rep.missing == 0 && rep.spurious == 0;
    return rep;
}

} // namespace wavelab::microlocal
