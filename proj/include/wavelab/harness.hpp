#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "wavelab/microlocal.hpp"
#include "wavelab/scenario.hpp"

/// Experiment verbs: each takes a parsed Scenario, computes, and returns a
/// pass flag, a JSON report, and the plot-ready CSV artifacts. emit_run
/// writes everything plus a manifest with per-artifact content hashes.
/// Identical scenario + seed reproduce every artifact byte for byte; the
/// only non-reproducible manifest field is wall_clock_seconds.
namespace wavelab::harness {

inline constexpr std::string_view kToolVersion = "wavelab 1.0.0";

struct Artifact {
    std::string filename;
    std::string bytes;
};

struct VerbOutcome {
    bool pass = false;
    json report;
    std::vector<Artifact> artifacts;
};

namespace detail {

/// Shortest-round-trip decimal for CSV cells.
inline std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string hex64(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(h));
    return buf;
}

inline json vec_json(Vec v, int d) {
    return d == 2 ? json::array({v[0], v[1]}) : json::array({v[0]});
}

} // namespace detail

inline microlocal::DetectorOptions detector_options(const Scenario& s) {
    microlocal::DetectorOptions o;
    o.threshold = s.detector.threshold;
    o.window_cells = s.detector.window_cells;
    o.stride_cells = s.detector.stride_cells;
    return o;
}

/// The scenario's Brownian driver; every verb uses this same path.
inline flows::BrownianPath scenario_path(const Scenario& s) {
    return flows::sample_brownian(subseed(s.seed, "path"), s.time.T,
                                  s.time.n_steps);
}

inline VerbOutcome run_flow(const Scenario& s) {
    SymbolField a1 = make_symbol(s.symbol_a, s.grid.d);
    SymbolField b1 = make_symbol(s.symbol_b, s.grid.d);
    flows::BrownianPath w = scenario_path(s);
    flows::PhasePoint p0{s.phase_point.x, s.phase_point.xi};
    flows::FlowTrajectory traj = flows::integrate_flow(a1, b1, w, p0);

    std::string csv = s.grid.d == 2 ? "t,w,x1,x2,xi1,xi2\n" : "t,w,x,xi\n";
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        const auto& p = traj.states[i];
        csv += detail::g17(traj.times[i]) + "," +
               detail::g17(w.cumulative[i]) + "," + detail::g17(p.x[0]);
        if (s.grid.d == 2) csv += "," + detail::g17(p.x[1]);
        csv += "," + detail::g17(p.xi[0]);
        if (s.grid.d == 2) csv += "," + detail::g17(p.xi[1]);
        csv += "\n";
    }

    VerbOutcome out;
    out.pass = true; // blow-ups would have thrown
    out.report["verb"] = "run-flow";
    out.report["terminal"] = {
        {"x", detail::vec_json(traj.terminal().x, s.grid.d)},
        {"xi", detail::vec_json(traj.terminal().xi, s.grid.d)}};
    out.report["path_hash"] = detail::hex64(flows::path_hash(w));
    out.report["pass"] = true;
    out.artifacts.push_back({"trajectory.csv", std::move(csv)});
    return out;
}

namespace detail {

inline void frame_rows(std::string& csv, const PeriodicGrid& g, double t,
                       const GridFunction& u) {
    for (std::size_t j = 0; j < u.values.size(); ++j) {
        Vec x = g.node(j);
        csv += g17(t) + "," + g17(x[0]);
        if (g.d == 2) csv += "," + g17(x[1]);
        csv += "," + g17(u.values[j].real()) + "," + g17(u.values[j].imag()) +
               "\n";
    }
}

inline void spectrum_rows(std::string& csv, const PeriodicGrid& g, double t,
                          const GridFunction& u) {
    auto hat = spde::fft_hat(u);
    for (std::size_t m = 0; m < hat.size(); ++m) {
        auto kv = g.kvec(m);
        csv += g17(t) + "," + std::to_string(kv[0]);
        if (g.d == 2) csv += "," + std::to_string(kv[1]);
        csv += "," + g17(std::abs(hat[m])) + "\n";
    }
}

} // namespace detail

inline VerbOutcome run_spde(const Scenario& s) {
    PeriodicGrid g{s.grid.d, s.grid.N, s.grid.L};
    GridFunction u0 = make_datum(s.datum, g);
    SymbolField a = make_symbol(s.symbol_a, s.grid.d);
    SymbolField b = make_symbol(s.symbol_b, s.grid.d);
    flows::BrownianPath w = scenario_path(s);
    spde::SolverOptions opts;
    opts.frame_stride = s.time.frame_stride;
    spde::SPDESolution sol = spde::solve_spde(a, b, u0, w, opts);

    std::string frames = s.grid.d == 2 ? "t,x1,x2,re_u,im_u\n"
                                       : "t,x,re_u,im_u\n";
    std::string spectrum = s.grid.d == 2 ? "t,k1,k2,abs_hat\n"
                                         : "t,k,abs_hat\n";
    for (std::size_t f = 0; f < sol.frames.size(); ++f) {
        detail::frame_rows(frames, g, sol.times[f], sol.frames[f]);
        detail::spectrum_rows(spectrum, g, sol.times[f], sol.frames[f]);
    }

    VerbOutcome out;
    out.pass = true; // instability would have thrown
    out.report["verb"] = "run-spde";
    out.report["l2_initial"] = spde::l2_norm(sol.frames.front());
    out.report["l2_terminal"] = spde::l2_norm(sol.terminal());
    out.report["frames_kept"] = sol.frames.size();
    out.report["path_hash"] = detail::hex64(sol.path_hash);
    out.report["pass"] = true;
    out.artifacts.push_back({"frames.csv", std::move(frames)});
    out.artifacts.push_back({"spectrum.csv", std::move(spectrum)});
    return out;
}

namespace detail {

inline std::string wf_csv(const microlocal::WavefrontSet& wf) {
    std::string csv = "x,dir,slope\n";
    for (const auto& p : wf.points)
        csv += g17(p.x[0]) + "," + g17(p.dir[0]) + "," + g17(p.slope) + "\n";
    return csv;
}

} // namespace detail

/// Evolve, detect the wave front at both ends, push the initial front
/// forward along the bicharacteristics of the same path, and compare.
inline VerbOutcome run_propagation(const Scenario& s) {
    if (s.grid.d != 1)
        throw BadScenario("scenario.grid.d: run-propagation supports d = 1 "
                          "only (d = 2 fronts are verified by detection "
                          "scenarios)");
    PeriodicGrid g{s.grid.d, s.grid.N, s.grid.L};
    GridFunction u0 = make_datum(s.datum, g);
    SymbolField a = make_symbol(s.symbol_a, s.grid.d);
    SymbolField b = make_symbol(s.symbol_b, s.grid.d);
    flows::BrownianPath w = scenario_path(s);

    microlocal::DetectorOptions dopts = detector_options(s);
    int wc = dopts.window_cells > 0 ? dopts.window_cells : 32;
    double merge_gap = (2.0 * wc + 8.0) * g.dx();

    GridFunction uT = [&] {
        if (s.solver == "characteristics") {
            if (!transport_class(s.symbol_a.name) ||
                !transport_class(s.symbol_b.name))
                throw BadScenario("scenario.solver: the characteristics "
                                  "oracle needs transport-class symbols "
                                  "(linear in xi)");
            return spde::solve_characteristics(transport_coefficient(a),
                                               transport_coefficient(b), u0,
                                               w)
                .terminal();
        }
        return spde::solve_spde(a, b, u0, w).terminal();
    }();

    using microlocal::cluster_singular;
    using microlocal::detect_wavefront;
    microlocal::WavefrontSet wf0 =
        cluster_singular(detect_wavefront(u0, dopts), g, merge_gap);
    microlocal::WavefrontSet wfT =
        cluster_singular(detect_wavefront(uT, dopts), g, merge_gap);
    microlocal::WavefrontSet pred =
        microlocal::push_forward_wf(a, b, w, wf0, g);

    double x_tol = s.tolerances.x_tol_cells * g.dx();
    microlocal::WFCompareReport rep = microlocal::compare_wf(
        pred, wfT, g, x_tol, s.tolerances.angle_tol_deg);
    bool vacuous = pred.points.empty() && wfT.points.empty();

    VerbOutcome out;
    out.pass = rep.pass;
    out.report["verb"] = "run-propagation";
    out.report["solver"] = s.solver;
    out.report["rays_t0"] = wf0.points.size();
    out.report["rays_tT"] = wfT.points.size();
    out.report["matched"] = rep.matched;
    out.report["missing"] = rep.missing;
    out.report["spurious"] = rep.spurious;
    out.report["max_x_error"] = rep.max_x_error;
    out.report["max_x_error_cells"] = rep.max_x_error / g.dx();
    out.report["max_angle_error_deg"] = rep.max_angle_error_deg;
    out.report["x_tol_cells"] = s.tolerances.x_tol_cells;
    out.report["angle_tol_deg"] = s.tolerances.angle_tol_deg;
    out.report["vacuous"] = vacuous;
    out.report["pass"] = rep.pass;
    out.artifacts.push_back({"wavefront_t0.csv", detail::wf_csv(wf0)});
    out.artifacts.push_back({"predicted_tT.csv", detail::wf_csv(pred)});
    out.artifacts.push_back({"wavefront_tT.csv", detail::wf_csv(wfT)});
    return out;
}

/// Errors against a reference on dyadic coarsenings of one master path,
/// with the least-squares observed order. Reference: closed form when one
/// exists (linear_phase flow), otherwise the finest discretization
/// (characteristics oracle for the spde study, master-path flow otherwise).
inline VerbOutcome run_convergence(const Scenario& s) {
    if (s.convergence.ladder.empty())
        throw BadScenario("scenario.convergence: required for "
                          "run-convergence");
    flows::BrownianPath w = scenario_path(s);
    const auto& ladder = s.convergence.ladder;
    std::vector<double> dts, errs;
    std::string reference;

    if (s.convergence.study == "flow") {
        SymbolField a1 = make_symbol(s.symbol_a, s.grid.d);
        SymbolField b1 = make_symbol(s.symbol_b, s.grid.d);
        flows::PhasePoint p0{s.phase_point.x, s.phase_point.xi};
        flows::PhasePoint ref;
        if (s.symbol_a.name == "linear_phase" && s.symbol_b.name == "zero") {
            double wT = w.cumulative.back();
            ref = {{p0.x[0] * std::exp(wT), 0.0},
                   {p0.xi[0] * std::exp(-wT), 0.0}};
            reference = "closed_form";
        } else {
            ref = flows::integrate_flow(a1, b1, w, p0).terminal();
            reference = "master_path_flow";
        }
        for (std::uint64_t n : ladder) {
            auto wn = flows::coarsen(w, s.time.n_steps / n);
            auto end = flows::integrate_flow(a1, b1, wn, p0).terminal();
            dts.push_back(s.time.T / static_cast<double>(n));
            errs.push_back(norm(end.x - ref.x) + norm(end.xi - ref.xi));
        }
    } else {
        if (!transport_class(s.symbol_a.name) ||
            !transport_class(s.symbol_b.name))
            throw BadScenario("scenario.convergence.study: the spde study "
                              "needs transport-class symbols (linear in xi)");
        PeriodicGrid g{s.grid.d, s.grid.N, s.grid.L};
        GridFunction u0 = make_datum(s.datum, g);
        SymbolField a = make_symbol(s.symbol_a, s.grid.d);
        SymbolField b = make_symbol(s.symbol_b, s.grid.d);
        GridFunction ref =
            spde::solve_characteristics(transport_coefficient(a),
                                        transport_coefficient(b), u0, w)
                .terminal();
        reference = "characteristics";
        for (std::uint64_t n : ladder) {
            auto wn = flows::coarsen(w, s.time.n_steps / n);
            auto sol = spde::solve_spde(a, b, u0, wn);
            dts.push_back(s.time.T / static_cast<double>(n));
            errs.push_back(spde::linf_distance(sol.terminal(), ref));
        }
    }

    bool exact = true;
    for (double e : errs) exact = exact && e <= 1e-12;
    double min_order = s.tolerances.min_order > 0.0
                           ? s.tolerances.min_order
                           : (s.convergence.study == "flow" ? 0.9 : 0.7);
    double order = 0.0;
    if (!exact) {
        std::vector<double> clamped = errs;
        for (double& e : clamped) e = std::max(e, 1e-16);
        order = observed_order(dts, clamped);
    }

    std::string csv = "n,dt,error\n";
    for (std::size_t i = 0; i < ladder.size(); ++i)
        csv += std::to_string(ladder[i]) + "," + detail::g17(dts[i]) + "," +
               detail::g17(errs[i]) + "\n";

    VerbOutcome out;
    out.pass = exact || order >= min_order;
    out.report["verb"] = "run-convergence";
    out.report["study"] = s.convergence.study;
    out.report["reference"] = reference;
    out.report["errors"] = errs;
    out.report["exact"] = exact;
    if (exact)
        out.report["observed_order"] = nullptr;
    else
        out.report["observed_order"] = order;
    out.report["min_order"] = min_order;
    out.report["pass"] = out.pass;
    out.artifacts.push_back({"orders.csv", std::move(csv)});
    return out;
}

inline void write_file(const std::filesystem::path& p,
                       const std::string& bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + p.string() + "'");
    out << bytes;
}

/// Write the verb's artifacts, report.json, and manifest.json into out_dir.
/// Returns the pass flag. Everything except wall_clock_seconds in the
/// manifest is a pure function of the scenario.
inline bool emit_run(const Scenario& s, const std::string& out_dir,
                     const VerbOutcome& verb, double wall_clock_seconds) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    std::vector<Artifact> all = verb.artifacts;
    all.push_back({"report.json", verb.report.dump(2) + "\n"});

    json manifest;
    manifest["tool"] = std::string(kToolVersion);
    manifest["scenario_name"] = s.name;
    manifest["scenario_hash"] = detail::hex64(scenario_hash(s));
    manifest["seed"] = s.seed;
    json hashes;
    for (const auto& a : all) hashes[a.filename] = detail::hex64(fnv1a(a.bytes));
    manifest["artifacts"] = std::move(hashes);
    json checks;
    checks["pass"] = verb.pass;
    for (const char* key : {"vacuous", "exact"})
        if (verb.report.contains(key)) checks[key] = verb.report[key];
    manifest["checks"] = std::move(checks);
    manifest["wall_clock_seconds"] = wall_clock_seconds;

    for (const auto& a : all) write_file(fs::path(out_dir) / a.filename,
                                         a.bytes);
    write_file(fs::path(out_dir) / "manifest.json",
               manifest.dump(2) + "\n");
    return verb.pass;
}

} // namespace wavelab::harness
