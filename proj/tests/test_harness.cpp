#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "wavelab/harness.hpp"

using namespace wavelab;
using namespace wavelab::harness;
using Catch::Matchers::ContainsSubstring;
namespace fs = std::filesystem;

namespace {

Scenario demo_scenario() {
    Scenario s;
    s.name = "demo";
    s.seed = 7;
    s.grid = {1, 64, 10.0};
    s.time = {1.0, 256, 0};
    s.symbol_a = {"constant_transport", {-0.7}};
    s.symbol_b = {"zero", {}};
    s.datum = {.name = "gaussian", .center = {5.0, 0.0}, .width = 1.0};
    s.phase_point = {{2.0, 0.0}, {1.0, 0.0}};
    return s;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("scenario files round trip through canonical serialization",
          "[harness]") {
    Scenario s = demo_scenario();
    s.convergence = {"flow", {64, 128, 256}};
    s.detector.threshold = -2.25;
    s.tolerances.x_tol_cells = 1.5;

    std::string text = serialize_scenario(s);
    Scenario back = parse_scenario_text(text);
    CHECK(back == s);
    CHECK(serialize_scenario(back) == text);
    CHECK(scenario_hash(back) == scenario_hash(s));

    Scenario renamed = s;
    renamed.name = "demo-b";
    CHECK(scenario_hash(renamed) != scenario_hash(s));

    // d = 2 spellings: vector-valued fields carry both components.
    Scenario s2;
    s2.name = "plane";
    s2.grid = {2, 16, 4.0};
    s2.time = {0.5, 32, 0};
    s2.symbol_a = {"constant_transport", {0.3, -0.4}};
    s2.symbol_b = {"zero", {}};
    s2.datum = {.name = "line_singularity_2d", .a = 2.0};
    s2.phase_point = {{1.0, 2.0}, {0.6, 0.8}};
    CHECK(parse_scenario_text(serialize_scenario(s2)) == s2);

    s2.datum = DatumSpec{.name = "plane_wave", .k = {3, -2}};
    CHECK(parse_scenario_text(serialize_scenario(s2)) == s2);
}

TEST_CASE("scenario parsing reports precise field paths", "[harness]") {
    const json base = to_json(demo_scenario());
    auto mutated = [&](auto&& f) {
        json j = base;
        f(j);
        return j;
    };

    CHECK_THROWS_WITH(parse_scenario_text("{ nope"),
                      ContainsSubstring("scenario: invalid JSON"));
    CHECK_THROWS_WITH(parse_scenario(mutated([](json& j) { j["grids"] = 1; })),
                      ContainsSubstring("scenario: unknown key 'grids'"));
    CHECK_THROWS_WITH(parse_scenario(mutated([](json& j) { j.erase("name"); })),
                      ContainsSubstring("scenario: missing key 'name'"));
    CHECK_THROWS_WITH(parse_scenario(mutated([](json& j) { j["name"] = 3; })),
                      ContainsSubstring("scenario.name: expected a string"));
    CHECK_THROWS_WITH(parse_scenario(mutated([](json& j) { j["seed"] = -1; })),
                      ContainsSubstring(
                          "scenario.seed: expected a non-negative integer"));
    CHECK_THROWS_WITH(parse_scenario(mutated([](json& j) { j["version"] = 2; })),
                      ContainsSubstring("unsupported version 2"));
    CHECK_THROWS_WITH(
        parse_scenario(mutated([](json& j) { j["grid"]["N"] = 100; })),
        ContainsSubstring("scenario.grid.N: must be a power of two >= 8"));
    CHECK_THROWS_WITH(
        parse_scenario(mutated([](json& j) { j["time"]["n_steps"] = 100; })),
        ContainsSubstring("scenario.time.n_steps: must be a power of two"));
    CHECK_THROWS_WITH(
        parse_scenario(mutated(
            [](json& j) { j["symbol_a"]["params"] = json::array(); })),
        ContainsSubstring(
            "scenario.symbol_a.params: 'constant_transport' wants 1"));
    CHECK_THROWS_WITH(
        parse_scenario(mutated(
            [](json& j) { j["symbol_a"]["name"] = "biharmonic"; })),
        ContainsSubstring("scenario.symbol_a.name: unknown symbol"));
    CHECK_THROWS_WITH(
        parse_scenario(mutated([](json& j) {
            j["symbol_a"] = {{"name", "zero"}, {"params", json::array()}};
            j["symbol_b"] = j["symbol_a"];
            j["grid"]["d"] = 2;
            j["datum"] = {{"name", "step"}, {"x0", 5.0}};
            j["phase_point"] = {{"x", {1.0, 1.0}}, {"xi", {1.0, 0.0}}};
        })),
        ContainsSubstring("scenario.datum.name: 'step' needs grid.d = 1"));
    CHECK_THROWS_WITH(
        parse_scenario(mutated([](json& j) { j["datum"]["x0"] = 1.0; })),
        ContainsSubstring("scenario.datum: unknown key 'x0'"));
    CHECK_THROWS_WITH(
        parse_scenario(mutated(
            [](json& j) { j["phase_point"]["xi"] = {0.0}; })),
        ContainsSubstring("scenario.phase_point.xi: must be non-zero"));
    CHECK_THROWS_WITH(
        parse_scenario(mutated([](json& j) {
            j["convergence"] = {{"study", "flow"}, {"ladder", {128, 64}}};
        })),
        ContainsSubstring("scenario.convergence.ladder: entries must be "
                          "ascending"));
    CHECK_THROWS_WITH(
        parse_scenario(mutated([](json& j) {
            j["convergence"] = {{"study", "flow"}, {"ladder", {256, 512}}};
        })),
        ContainsSubstring("must not exceed time.n_steps"));
    CHECK_THROWS_WITH(
        parse_scenario(mutated([](json& j) { j["solver"] = "magic"; })),
        ContainsSubstring(
            "scenario.solver: must be 'spde' or 'characteristics'"));
    CHECK_THROWS_WITH(
        parse_scenario(mutated(
            [](json& j) { j["detector"]["window_cells"] = -4; })),
        ContainsSubstring("scenario.detector.window_cells: must be >= 0"));
}

TEST_CASE("scenario specs instantiate symbols, data, and transport speeds",
          "[harness]") {
    SymbolField a = make_symbol({"constant_transport", {0.7}}, 1);
    CHECK(a.value(0.3, {1.0, 0.0}, {2.0, 0.0}).real() == Catch::Approx(1.4));
    CHECK(transport_coefficient(a).value(0.0, {9.0, 0.0}) == Catch::Approx(-0.7));

    SymbolField av = make_symbol({"variable_transport", {-0.5, -0.25}}, 1);
    double x = std::numbers::pi / 2.0;
    CHECK(transport_coefficient(av).value(0.0, {x, 0.0}) ==
          Catch::Approx(0.75).margin(1e-12));

    CHECK(transport_class("zero"));
    CHECK(transport_class("constant_transport"));
    CHECK(transport_class("variable_transport"));
    CHECK_FALSE(transport_class("halfwave"));
    CHECK_FALSE(transport_class("linear_phase"));

    PeriodicGrid g{1, 64, 10.0};
    GridFunction step = make_datum({.name = "step", .x0 = 5.0}, g);
    REQUIRE(step.values.size() == 64);
    double lo = 1e9, hi = -1e9;
    for (auto v : step.values) {
        lo = std::min(lo, v.real());
        hi = std::max(hi, v.real());
    }
    CHECK(hi - lo > 0.5);

    GridFunction pw = make_datum(DatumSpec{.name = "plane_wave", .k = {3, 0}},
                                 g);
    auto hat = spde::fft_hat(pw);
    for (std::size_t m = 0; m < hat.size(); ++m) {
        if (g.kvec(m)[0] == 3)
            CHECK(std::abs(hat[m]) == Catch::Approx(1.0));
        else
            CHECK(std::abs(hat[m]) < 1e-12);
    }

    PeriodicGrid g2{2, 16, 4.0};
    CHECK(make_datum(DatumSpec{.name = "line_singularity_2d", .a = 2.0}, g2)
              .values.size() == 256);
}

TEST_CASE("flow verb follows the constant-speed closed form", "[harness]") {
    Scenario s = demo_scenario();
    flows::BrownianPath w = scenario_path(s);
    double expect = 2.0 - 0.7 * w.cumulative.back();

    VerbOutcome out = run_flow(s);
    CHECK(out.pass);
    CHECK(out.report["terminal"]["x"][0].get<double>() ==
          Catch::Approx(expect).margin(1e-12));
    CHECK(out.report["terminal"]["xi"][0].get<double>() == Catch::Approx(1.0));

    REQUIRE(out.artifacts.size() == 1);
    CHECK(out.artifacts[0].filename == "trajectory.csv");
    const std::string& csv = out.artifacts[0].bytes;
    CHECK(csv.rfind("t,w,x,xi\n", 0) == 0);
    std::size_t rows = 0;
    for (char c : csv) rows += c == '\n';
    CHECK(rows == s.time.n_steps + 2); // header + initial + one per step

    // Different seed, different path.
    Scenario s8 = s;
    s8.seed = 8;
    CHECK(run_flow(s8).report["path_hash"] != out.report["path_hash"]);

    // Zero symbols freeze the trajectory.
    Scenario sz = s;
    sz.symbol_a = {"zero", {}};
    VerbOutcome vz = run_flow(sz);
    CHECK(vz.report["terminal"]["x"][0].get<double>() == 2.0);
}

TEST_CASE("spde verb keeps the configured frames and is exact at zero symbol",
          "[harness]") {
    Scenario s = demo_scenario();
    s.symbol_a = {"zero", {}};
    s.time = {1.0, 512, 128};

    VerbOutcome out = run_spde(s);
    CHECK(out.pass);
    CHECK(out.report["frames_kept"] == 5); // 0, 128, 256, 384, 512
    CHECK(out.report["l2_initial"].get<double>() ==
          Catch::Approx(out.report["l2_terminal"].get<double>()));
    REQUIRE(out.artifacts.size() == 2);
    CHECK(out.artifacts[0].filename == "frames.csv");
    CHECK(out.artifacts[1].filename == "spectrum.csv");
    CHECK(out.artifacts[0].bytes.rfind("t,x,re_u,im_u\n", 0) == 0);
    CHECK(out.artifacts[1].bytes.rfind("t,k,abs_hat\n", 0) == 0);
}

TEST_CASE("propagation verb verifies the step scenario end to end",
          "[harness]") {
    Scenario s = demo_scenario();
    s.grid = {1, 1024, 256.0};
    s.datum = {.name = "step", .x0 = 128.0};
    s.time = {1.0, 1024, 0};

    for (const char* solver : {"spde", "characteristics"}) {
        s.solver = solver;
        VerbOutcome out = run_propagation(s);
        INFO(solver << ": " << out.report.dump());
        CHECK(out.pass);
        CHECK(out.report["matched"] == 2);
        CHECK(out.report["missing"] == 0);
        CHECK(out.report["spurious"] == 0);
        CHECK(out.report["max_x_error_cells"].get<double>() < 0.5);
        CHECK_FALSE(out.report["vacuous"].get<bool>());
        REQUIRE(out.artifacts.size() == 3);
        CHECK(out.artifacts[0].bytes.rfind("x,dir,slope\n", 0) == 0);
    }
}

TEST_CASE("propagation verb reports a vacuous pass for smooth data",
          "[harness]") {
    Scenario s = demo_scenario();
    s.grid = {1, 1024, 256.0};
    s.datum = {.name = "gaussian", .center = {128.0, 0.0}, .width = 8.0};
    s.time = {1.0, 1024, 0};

    VerbOutcome out = run_propagation(s);
    CHECK(out.pass);
    CHECK(out.report["vacuous"].get<bool>());
    CHECK(out.report["rays_t0"] == 0);
    CHECK(out.report["rays_tT"] == 0);
}

TEST_CASE("propagation verb rejects unsupported configurations", "[harness]") {
    Scenario s2;
    s2.name = "plane";
    s2.grid = {2, 16, 4.0};
    s2.time = {0.5, 32, 0};
    s2.symbol_a = {"constant_transport", {0.3, -0.4}};
    s2.symbol_b = {"zero", {}};
    s2.datum = {.name = "line_singularity_2d", .a = 2.0};
    CHECK_THROWS_WITH(run_propagation(s2), ContainsSubstring("d = 1"));

    Scenario s = demo_scenario();
    s.grid = {1, 1024, 256.0};
    s.datum = {.name = "step", .x0 = 128.0};
    s.time = {1.0, 1024, 0};
    s.symbol_a = {"halfwave", {0.5, 0.1}};
    s.solver = "characteristics";
    CHECK_THROWS_WITH(run_propagation(s),
                      ContainsSubstring("transport-class"));
}

TEST_CASE("convergence verb measures flow and solver orders", "[harness]") {
    Scenario f = demo_scenario();
    f.symbol_a = {"linear_phase", {}};
    f.time = {1.0, 4096, 0};
    f.phase_point = {{1.0, 0.0}, {1.0, 0.0}};
    f.convergence = {"flow", {64, 128, 256, 512, 1024}};

    VerbOutcome vf = run_convergence(f);
    CHECK(vf.pass);
    CHECK(vf.report["reference"] == "closed_form");
    CHECK_FALSE(vf.report["exact"].get<bool>());
    CHECK(vf.report["observed_order"].get<double>() >= 0.9);
    CHECK(vf.report["min_order"].get<double>() == 0.9);
    REQUIRE(vf.artifacts.size() == 1);
    CHECK(vf.artifacts[0].bytes.rfind("n,dt,error\n", 0) == 0);

    Scenario c = demo_scenario();
    c.seed = 0xA4;
    c.grid = {1, 64, 2.0 * std::numbers::pi};
    c.symbol_a = {"variable_transport", {-0.5, -0.25}};
    c.symbol_b = {"constant_transport", {-0.2}};
    c.datum = {.name = "gaussian",
               .center = {std::numbers::pi, 0.0},
               .width = 0.7};
    c.time = {0.25, 32768, 0};
    c.convergence = {"spde", {256, 512, 1024, 2048, 4096}};

    VerbOutcome vc = run_convergence(c);
    INFO(vc.report.dump());
    CHECK(vc.pass);
    CHECK(vc.report["reference"] == "characteristics");
    CHECK(vc.report["observed_order"].get<double>() >= 0.7);
    CHECK(vc.report["min_order"].get<double>() == 0.7);
    auto errs = vc.report["errors"].get<std::vector<double>>();
    REQUIRE(errs.size() == 5);
    CHECK(errs.back() < errs.front() / 4.0);

    Scenario bad = demo_scenario();
    CHECK_THROWS_WITH(run_convergence(bad), ContainsSubstring("required"));
    bad.convergence = {"spde", {64, 128}};
    bad.symbol_a = {"halfwave", {0.5, 0.1}};
    CHECK_THROWS_WITH(run_convergence(bad),
                      ContainsSubstring("transport-class"));
}

TEST_CASE("convergence verb flags exact ladders", "[harness]") {
    Scenario s = demo_scenario();
    s.symbol_a = {"zero", {}};
    s.grid = {1, 128, 10.0};
    s.time = {1.0, 1024, 0};
    s.convergence = {"spde", {64, 128, 256}};

    VerbOutcome out = run_convergence(s);
    CHECK(out.pass);
    CHECK(out.report["exact"].get<bool>());
    CHECK(out.report["observed_order"].is_null());
}

TEST_CASE("emit_run reproduces artifacts byte for byte", "[harness]") {
    Scenario s = demo_scenario();
    fs::path root = fs::temp_directory_path() / "wavelab_harness_emit";
    fs::remove_all(root);
    fs::path d1 = root / "a", d2 = root / "b";

    CHECK(emit_run(s, d1.string(), run_flow(s), 0.125));
    CHECK(emit_run(s, d2.string(), run_flow(s), 99.5));

    CHECK(slurp(d1 / "trajectory.csv") == slurp(d2 / "trajectory.csv"));
    CHECK(slurp(d1 / "report.json") == slurp(d2 / "report.json"));
    CHECK(!slurp(d1 / "trajectory.csv").empty());

    json m1 = json::parse(slurp(d1 / "manifest.json"));
    json m2 = json::parse(slurp(d2 / "manifest.json"));
    CHECK(m1["wall_clock_seconds"] != m2["wall_clock_seconds"]);
    m1.erase("wall_clock_seconds");
    m2.erase("wall_clock_seconds");
    CHECK(m1 == m2);

    CHECK(m1["tool"] == "wavelab 1.0.0");
    CHECK(m1["scenario_name"] == "demo");
    CHECK(m1["seed"] == 7);
    CHECK(m1["scenario_hash"] == detail::hex64(scenario_hash(s)));
    CHECK(m1["checks"]["pass"] == true);
    REQUIRE(m1["artifacts"].contains("trajectory.csv"));
    CHECK(m1["artifacts"]["trajectory.csv"] ==
          detail::hex64(fnv1a(slurp(d1 / "trajectory.csv"))));
    fs::remove_all(root);
}
