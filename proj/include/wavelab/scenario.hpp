#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "wavelab/data.hpp"
#include "wavelab/errors.hpp"
#include "wavelab/grid.hpp"
#include "wavelab/rng.hpp"
#include "wavelab/spde.hpp"
#include "wavelab/symbol.hpp"

/// Scenario files: versioned JSON configs naming everything a run needs --
/// grid, time stepping, the symbols a and b, the initial datum, detector
/// tuning, and tolerances. Parsing is strict: unknown keys, wrong types,
/// missing fields, and incompatible combinations are all BadScenario errors
/// carrying the offending field path. parse -> serialize -> parse is the
/// identity, and serialization is canonical (sorted keys), so a scenario has
/// one well-defined content hash.
namespace wavelab::harness {

using nlohmann::json;
using spde::GridFunction;
using spde::PeriodicGrid;
using symbols::SymbolField;

struct SymbolSpec {
    std::string name = "zero"; // zero | constant_transport | variable_transport
                               // | halfwave | linear_phase
    std::vector<double> params;
    bool operator==(const SymbolSpec&) const = default;
};

struct GridSpec {
    int d = 1;
    int N = 0;
    double L = 0.0;
    bool operator==(const GridSpec&) const = default;
};

struct TimeSpec {
    double T = 0.0;
    std::uint64_t n_steps = 0;
    std::uint64_t frame_stride = 0; // 0 = keep first and last frame only
    bool operator==(const TimeSpec&) const = default;
};

struct DatumSpec {
    std::string name = "step"; // gaussian | step | kink | plane_wave
                               // | line_singularity_2d
    Vec center{0.0, 0.0};      // gaussian
    double width = 1.0;        // gaussian
    double x0 = 0.0;           // step, kink
    std::array<int, 2> k{0, 0}; // plane_wave
    double a = 0.0;            // line_singularity_2d
    bool operator==(const DatumSpec&) const = default;
};

struct DetectorSpec {
    double threshold = -2.5;
    int window_cells = 0; // 0 = library default for the dimension
    int stride_cells = 0; // 0 = library default for the dimension
    bool operator==(const DetectorSpec&) const = default;
};

struct ToleranceSpec {
    double x_tol_cells = 2.0;
    double angle_tol_deg = 10.0;
    double min_order = 0.0; // 0 = study default (flow 0.9, spde 0.7)
    bool operator==(const ToleranceSpec&) const = default;
};

struct PhasePointSpec {
    Vec x{0.0, 0.0};
    Vec xi{1.0, 0.0};
    bool operator==(const PhasePointSpec&) const = default;
};

struct ConvergenceSpec {
    std::string study = "spde"; // spde | flow
    std::vector<std::uint64_t> ladder;
    bool operator==(const ConvergenceSpec&) const = default;
};

struct Scenario {
    int version = 1;
    std::string name;
    std::uint64_t seed = 1;
    GridSpec grid;
    TimeSpec time;
    SymbolSpec symbol_a;
    SymbolSpec symbol_b;
    DatumSpec datum;
    DetectorSpec detector;
    ToleranceSpec tolerances;
    PhasePointSpec phase_point;
    ConvergenceSpec convergence; // empty ladder = no convergence study
    std::string solver = "spde"; // spde | characteristics
    bool operator==(const Scenario&) const = default;
};

namespace detail {

inline void check_keys(const json& j, const std::string& path,
                       std::initializer_list<std::string_view> allowed) {
    if (!j.is_object())
        throw BadScenario(path + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) ==
            allowed.end())
            throw BadScenario(path + ": unknown key '" + it.key() + "'");
    }
}

inline const json& member(const json& j, const std::string& path,
                          const char* key) {
    auto it = j.find(key);
    if (it == j.end())
        throw BadScenario(path + ": missing key '" + std::string(key) + "'");
    return *it;
}

inline double number_at(const json& j, const std::string& path,
                        const char* key) {
    const json& v = member(j, path, key);
    if (!v.is_number())
        throw BadScenario(path + "." + key + ": expected a number");
    return v.get<double>();
}

inline std::int64_t int_at(const json& j, const std::string& path,
                           const char* key) {
    const json& v = member(j, path, key);
    if (!v.is_number_integer())
        throw BadScenario(path + "." + key + ": expected an integer");
    return v.get<std::int64_t>();
}

inline std::uint64_t uint_at(const json& j, const std::string& path,
                             const char* key) {
    const json& v = member(j, path, key);
    if (!v.is_number_integer() ||
        (!v.is_number_unsigned() && v.get<std::int64_t>() < 0))
        throw BadScenario(path + "." + key +
                          ": expected a non-negative integer");
    return v.get<std::uint64_t>();
}

inline std::string string_at(const json& j, const std::string& path,
                             const char* key) {
    const json& v = member(j, path, key);
    if (!v.is_string())
        throw BadScenario(path + "." + key + ": expected a string");
    return v.get<std::string>();
}

inline std::vector<double> numbers_at(const json& j, const std::string& path,
                                      const char* key) {
    const json& v = member(j, path, key);
    if (!v.is_array())
        throw BadScenario(path + "." + key + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number())
            throw BadScenario(path + "." + key +
                              ": expected an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

inline Vec vec_at(const json& j, const std::string& path, const char* key,
                  int d) {
    std::vector<double> v = numbers_at(j, path, key);
    if (static_cast<int>(v.size()) != d)
        throw BadScenario(path + "." + key + ": expected " +
                          std::to_string(d) + " component(s)");
    return {v[0], d == 2 ? v[1] : 0.0};
}

inline void parse_symbol(const json& j, const std::string& path, int d,
                         SymbolSpec& out) {
    check_keys(j, path, {"name", "params"});
    out.name = string_at(j, path, "name");
    out.params = j.contains("params")
                     ? numbers_at(j, path, "params")
                     : std::vector<double>{};
    auto arity = [&](std::size_t want, int need_d) {
        if (need_d > 0 && d != need_d)
            throw BadScenario(path + ".name: '" + out.name +
                              "' needs grid.d = " + std::to_string(need_d));
        if (out.params.size() != want)
            throw BadScenario(path + ".params: '" + out.name + "' wants " +
                              std::to_string(want) + " parameter(s)");
    };
    if (out.name == "zero")
        arity(0, 0);
    else if (out.name == "constant_transport")
        arity(static_cast<std::size_t>(d), 0);
    else if (out.name == "variable_transport")
        arity(2, 1);
    else if (out.name == "halfwave")
        arity(2, 1);
    else if (out.name == "linear_phase")
        arity(0, 1);
    else
        throw BadScenario(path + ".name: unknown symbol '" + out.name + "'");
}

inline void parse_datum(const json& j, const std::string& path, int d,
                        DatumSpec& out) {
    out.name = string_at(j, path, "name");
    if (out.name == "gaussian") {
        check_keys(j, path, {"name", "center", "width"});
        out.center = vec_at(j, path, "center", d);
        out.width = number_at(j, path, "width");
        if (!(out.width > 0.0))
            throw BadScenario(path + ".width: must be positive");
    } else if (out.name == "step" || out.name == "kink") {
        if (d != 1)
            throw BadScenario(path + ".name: '" + out.name +
                              "' needs grid.d = 1");
        check_keys(j, path, {"name", "x0"});
        out.x0 = number_at(j, path, "x0");
    } else if (out.name == "plane_wave") {
        check_keys(j, path, {"name", "k"});
        const json& kv = member(j, path, "k");
        if (!kv.is_array() || static_cast<int>(kv.size()) != d)
            throw BadScenario(path + ".k: expected " + std::to_string(d) +
                              " integer component(s)");
        for (int i = 0; i < d; ++i) {
            if (!kv[i].is_number_integer())
                throw BadScenario(path + ".k: expected integer components");
            out.k[static_cast<std::size_t>(i)] = kv[i].get<int>();
        }
    } else if (out.name == "line_singularity_2d") {
        if (d != 2)
            throw BadScenario(path + ".name: 'line_singularity_2d' needs "
                              "grid.d = 2");
        check_keys(j, path, {"name", "a"});
        out.a = number_at(j, path, "a");
    } else {
        throw BadScenario(path + ".name: unknown datum '" + out.name + "'");
    }
}

} // namespace detail

inline Scenario parse_scenario(const json& j) {
    using namespace detail;
    const std::string R = "scenario";
    check_keys(j, R,
               {"version", "name", "seed", "grid", "time", "symbol_a",
                "symbol_b", "datum", "detector", "tolerances", "phase_point",
                "convergence", "solver"});
    Scenario s;

    s.version = static_cast<int>(int_at(j, R, "version"));
    if (s.version != 1)
        throw BadScenario(R + ".version: unsupported version " +
                          std::to_string(s.version));
    s.name = string_at(j, R, "name");
    if (s.name.empty())
        throw BadScenario(R + ".name: must not be empty");
    s.seed = uint_at(j, R, "seed");

    {
        const json& g = member(j, R, "grid");
        const std::string P = R + ".grid";
        check_keys(g, P, {"d", "N", "L"});
        s.grid.d = static_cast<int>(int_at(g, P, "d"));
        if (s.grid.d != 1 && s.grid.d != 2)
            throw BadScenario(P + ".d: must be 1 or 2");
        s.grid.N = static_cast<int>(int_at(g, P, "N"));
        if (s.grid.N < 8 || !is_power_of_two(static_cast<std::size_t>(s.grid.N)))
            throw BadScenario(P + ".N: must be a power of two >= 8");
        s.grid.L = number_at(g, P, "L");
        if (!(s.grid.L > 0.0))
            throw BadScenario(P + ".L: must be positive");
    }

    {
        const json& t = member(j, R, "time");
        const std::string P = R + ".time";
        check_keys(t, P, {"T", "n_steps", "frame_stride"});
        s.time.T = number_at(t, P, "T");
        if (!(s.time.T > 0.0))
            throw BadScenario(P + ".T: must be positive");
        s.time.n_steps = uint_at(t, P, "n_steps");
        if (s.time.n_steps == 0 || !is_power_of_two(s.time.n_steps))
            throw BadScenario(P + ".n_steps: must be a power of two");
        s.time.frame_stride =
            t.contains("frame_stride") ? uint_at(t, P, "frame_stride") : 0;
    }

    parse_symbol(member(j, R, "symbol_a"), R + ".symbol_a", s.grid.d,
                 s.symbol_a);
    parse_symbol(member(j, R, "symbol_b"), R + ".symbol_b", s.grid.d,
                 s.symbol_b);
    parse_datum(member(j, R, "datum"), R + ".datum", s.grid.d, s.datum);

    if (j.contains("detector")) {
        const json& dj = j["detector"];
        const std::string P = R + ".detector";
        check_keys(dj, P, {"threshold", "window_cells", "stride_cells"});
        if (dj.contains("threshold"))
            s.detector.threshold = number_at(dj, P, "threshold");
        if (dj.contains("window_cells")) {
            s.detector.window_cells =
                static_cast<int>(int_at(dj, P, "window_cells"));
            if (s.detector.window_cells < 0)
                throw BadScenario(P + ".window_cells: must be >= 0");
        }
        if (dj.contains("stride_cells")) {
            s.detector.stride_cells =
                static_cast<int>(int_at(dj, P, "stride_cells"));
            if (s.detector.stride_cells < 0)
                throw BadScenario(P + ".stride_cells: must be >= 0");
        }
    }

    if (j.contains("tolerances")) {
        const json& tj = j["tolerances"];
        const std::string P = R + ".tolerances";
        check_keys(tj, P, {"x_tol_cells", "angle_tol_deg", "min_order"});
        if (tj.contains("x_tol_cells")) {
            s.tolerances.x_tol_cells = number_at(tj, P, "x_tol_cells");
            if (s.tolerances.x_tol_cells < 0.0)
                throw BadScenario(P + ".x_tol_cells: must be >= 0");
        }
        if (tj.contains("angle_tol_deg")) {
            s.tolerances.angle_tol_deg = number_at(tj, P, "angle_tol_deg");
            if (s.tolerances.angle_tol_deg < 0.0)
                throw BadScenario(P + ".angle_tol_deg: must be >= 0");
        }
        if (tj.contains("min_order")) {
            s.tolerances.min_order = number_at(tj, P, "min_order");
            if (s.tolerances.min_order < 0.0)
                throw BadScenario(P + ".min_order: must be >= 0");
        }
    }

    if (j.contains("phase_point")) {
        const json& pj = j["phase_point"];
        const std::string P = R + ".phase_point";
        check_keys(pj, P, {"x", "xi"});
        s.phase_point.x = vec_at(pj, P, "x", s.grid.d);
        s.phase_point.xi = vec_at(pj, P, "xi", s.grid.d);
        if (norm(s.phase_point.xi) == 0.0)
            throw BadScenario(P + ".xi: must be non-zero");
    }

    if (j.contains("convergence")) {
        const json& cj = j["convergence"];
        const std::string P = R + ".convergence";
        check_keys(cj, P, {"study", "ladder"});
        s.convergence.study = string_at(cj, P, "study");
        if (s.convergence.study != "spde" && s.convergence.study != "flow")
            throw BadScenario(P + ".study: must be 'spde' or 'flow'");
        const json& lv = member(cj, P, "ladder");
        if (!lv.is_array() || lv.size() < 2)
            throw BadScenario(P + ".ladder: expected >= 2 step counts");
        for (const auto& e : lv) {
            if (!e.is_number_integer() || e.get<std::int64_t>() <= 0)
                throw BadScenario(P + ".ladder: entries must be positive "
                                  "integers");
            s.convergence.ladder.push_back(e.get<std::uint64_t>());
        }
        for (std::size_t i = 0; i < s.convergence.ladder.size(); ++i) {
            std::uint64_t n = s.convergence.ladder[i];
            if (!is_power_of_two(n))
                throw BadScenario(P + ".ladder: entries must be powers of two");
            if (i > 0 && n <= s.convergence.ladder[i - 1])
                throw BadScenario(P + ".ladder: entries must be ascending");
            if (n > s.time.n_steps)
                throw BadScenario(P + ".ladder: entries must not exceed "
                                  "time.n_steps (the master resolution)");
        }
    }

    if (j.contains("solver")) {
        s.solver = string_at(j, R, "solver");
        if (s.solver != "spde" && s.solver != "characteristics")
            throw BadScenario(R +
                              ".solver: must be 'spde' or 'characteristics'");
    }

    return s;
}

inline json to_json(const Scenario& s) {
    json j;
    j["version"] = s.version;
    j["name"] = s.name;
    j["seed"] = s.seed;
    j["grid"] = {{"d", s.grid.d}, {"N", s.grid.N}, {"L", s.grid.L}};
    j["time"] = {{"T", s.time.T},
                 {"n_steps", s.time.n_steps},
                 {"frame_stride", s.time.frame_stride}};
    j["symbol_a"] = {{"name", s.symbol_a.name}, {"params", s.symbol_a.params}};
    j["symbol_b"] = {{"name", s.symbol_b.name}, {"params", s.symbol_b.params}};
    json d;
    d["name"] = s.datum.name;
    if (s.datum.name == "gaussian") {
        d["center"] = s.grid.d == 2
                          ? json::array({s.datum.center[0], s.datum.center[1]})
                          : json::array({s.datum.center[0]});
        d["width"] = s.datum.width;
    } else if (s.datum.name == "step" || s.datum.name == "kink") {
        d["x0"] = s.datum.x0;
    } else if (s.datum.name == "plane_wave") {
        d["k"] = s.grid.d == 2 ? json::array({s.datum.k[0], s.datum.k[1]})
                               : json::array({s.datum.k[0]});
    } else {
        d["a"] = s.datum.a;
    }
    j["datum"] = std::move(d);
    j["detector"] = {{"threshold", s.detector.threshold},
                     {"window_cells", s.detector.window_cells},
                     {"stride_cells", s.detector.stride_cells}};
    j["tolerances"] = {{"x_tol_cells", s.tolerances.x_tol_cells},
                       {"angle_tol_deg", s.tolerances.angle_tol_deg},
                       {"min_order", s.tolerances.min_order}};
    json pp;
    pp["x"] = s.grid.d == 2
                  ? json::array({s.phase_point.x[0], s.phase_point.x[1]})
                  : json::array({s.phase_point.x[0]});
    pp["xi"] = s.grid.d == 2
                   ? json::array({s.phase_point.xi[0], s.phase_point.xi[1]})
                   : json::array({s.phase_point.xi[0]});
    j["phase_point"] = std::move(pp);
    if (!s.convergence.ladder.empty())
        j["convergence"] = {{"study", s.convergence.study},
                            {"ladder", s.convergence.ladder}};
    j["solver"] = s.solver;
    return j;
}

/// Canonical bytes: sorted keys, two-space indent, trailing newline.
inline std::string serialize_scenario(const Scenario& s) {
    return to_json(s).dump(2) + "\n";
}

inline std::uint64_t scenario_hash(const Scenario& s) {
    return fnv1a(serialize_scenario(s));
}

inline Scenario parse_scenario_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw BadScenario(std::string("scenario: invalid JSON: ") + e.what());
    }
    return parse_scenario(j);
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw BadScenario("scenario: cannot read file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario_text(ss.str());
}

inline void save_scenario(const Scenario& s, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw BadScenario("scenario: cannot write file '" + path + "'");
    out << serialize_scenario(s);
}

/// Instantiate a library symbol from its spec (validated at parse time).
inline SymbolField make_symbol(const SymbolSpec& spec, int d) {
    if (spec.name == "zero") return symbols::zero_symbol(d);
    if (spec.name == "constant_transport")
        return symbols::constant_transport(spec.params);
    if (spec.name == "variable_transport")
        return symbols::variable_transport(spec.params[0], spec.params[1]);
    if (spec.name == "halfwave")
        return symbols::halfwave(spec.params[0], spec.params[1]);
    if (spec.name == "linear_phase") return symbols::linear_phase();
    throw BadScenario("scenario.symbol: unknown symbol '" + spec.name + "'");
}

inline GridFunction make_datum(const DatumSpec& spec, const PeriodicGrid& g) {
    if (spec.name == "gaussian")
        return spde::make_gaussian(g, spec.center, spec.width);
    if (spec.name == "step") return spde::make_step(g, spec.x0);
    if (spec.name == "kink") return spde::make_kink(g, spec.x0);
    if (spec.name == "plane_wave") return spde::make_plane_wave(g, spec.k);
    if (spec.name == "line_singularity_2d")
        return spde::make_line_singularity(g, spec.a);
    throw BadScenario("scenario.datum: unknown datum '" + spec.name + "'");
}

/// Symbols linear in xi, for which the scalar characteristics oracle applies.
inline bool transport_class(const std::string& symbol_name) {
    return symbol_name == "zero" || symbol_name == "constant_transport" ||
           symbol_name == "variable_transport";
}

/// Characteristic speed of a transport symbol: alpha(t, x) = -a(t, x, 1).
inline spde::CoefficientField transport_coefficient(const SymbolField& a) {
    spde::CoefficientField c;
    c.name = "-" + a.name + "(.,1)";
    c.value = [a](double t, Vec x) {
        return -a.value(t, x, {1.0, 0.0}).real();
    };
    return c;
}

} // namespace wavelab::harness
