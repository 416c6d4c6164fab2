#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <set>
#include <utility>
#include <vector>

#include "wavelab/data.hpp"
#include "wavelab/microlocal.hpp"

using namespace wavelab;
using namespace wavelab::spde;
using namespace wavelab::microlocal;
using flows::BrownianPath;
using flows::sample_brownian;
using flows::zero_path;
using Catch::Matchers::ContainsSubstring;

TEST_CASE("window profile is a smooth even bump on [-1, 1]", "[microlocal]") {
    CHECK(window_profile(0.0) == 1.0);
    CHECK(window_profile(1.0) == 0.0);
    CHECK(window_profile(-1.0) == 0.0);
    CHECK(window_profile(2.5) == 0.0);
    CHECK(window_profile(0.5) == Catch::Approx(1.0 / 16.0)); // cos^8(pi/4)
    double prev = 1.0;
    for (int i = 1; i <= 100; ++i) {
        double v = window_profile(i / 100.0);
        CHECK(v <= prev);
        CHECK(v == window_profile(-i / 100.0));
        prev = v;
    }
}

TEST_CASE("windowing localizes with the periodic metric", "[microlocal]") {
    PeriodicGrid g{1, 256, 20.0};
    GridFunction u = zero_function(g);
    for (auto& v : u.values) v = 1.0;
    GridFunction w = apply_window(u, {0.0, 0.0}, 32);
    for (int j = 0; j < g.N; ++j) {
        int dist = std::min(j, g.N - j); // cells to the centre, wrapping
        double v = std::abs(w.values[j]);
        if (dist >= 32)
            CHECK(v == 0.0);
        else
            CHECK(v == Catch::Approx(window_profile(dist / 32.0)));
    }
}

TEST_CASE("cone bands tile the analysis band", "[microlocal]") {
    DetectorOptions opts;

    PeriodicGrid g{1, 1024, 2.0 * std::numbers::pi};
    ConeBands bands = make_cone_bands(g, opts);
    REQUIRE(bands.dirs.size() == 2);
    for (std::size_t di = 0; di < 2; ++di) {
        CHECK(bands.shell_logr[di].size() == 193); // radii 64 .. 256
        CHECK(bands.shell_logr[di].front() == Catch::Approx(std::log(64.0)));
        CHECK(bands.shell_logr[di].back() == Catch::Approx(std::log(256.0)));
        for (const auto& sh : bands.shell_idx[di]) // one signed mode per shell
            CHECK(sh.size() == 1);
    }

    PeriodicGrid tiny{1, 32, 1.0};
    CHECK_THROWS_AS(make_cone_bands(tiny, opts), EmptyBand);
    CHECK_THROWS_WITH(make_cone_bands(tiny, opts), ContainsSubstring("N >= 64"));

    PeriodicGrid g2{2, 128, 1.0};
    ConeBands b2 = make_cone_bands(g2, opts);
    REQUIRE(b2.dirs.size() == 16);
    for (std::size_t di = 0; di < b2.dirs.size(); ++di)
        CHECK(b2.shell_logr[di].size() >= 8);
}

TEST_CASE("decay slopes separate jump, kink, and smooth data", "[microlocal]") {
    PeriodicGrid g{1, 1024, 2.0 * std::numbers::pi};
    const double pi = std::numbers::pi;
    DetectorOptions opts;
    ConeBands bands = make_cone_bands(g, opts);
    auto slopes = [&](const GridFunction& u, double x) {
        SlopeProfile p = slope_profile(u, {x, 0.0}, bands, opts);
        return std::pair{p.rays[0].slope, p.rays[1].slope};
    };

    GridFunction step = make_step(g, pi);
    auto [sp, sm] = slopes(step, pi);
    CHECK(sp == Catch::Approx(-1.03).margin(0.15));
    CHECK(sm == Catch::Approx(-1.03).margin(0.15));
    CHECK(sp > opts.threshold);
    auto [sfp, sfm] = slopes(step, 0.0); // antipode of the jump
    CHECK(sfp < -8.0);
    CHECK(sfm < -8.0);

    GridFunction kink = make_kink(g, pi);
    auto [kp, km] = slopes(kink, pi);
    CHECK(kp == Catch::Approx(-2.18).margin(0.2));
    CHECK(km == Catch::Approx(-2.18).margin(0.2));
    CHECK(kp > opts.threshold); // a derivative jump still reads singular
    auto [kfp, kfm] = slopes(kink, 0.0);
    CHECK(kfp < -8.0);
    CHECK(kfm < -8.0);

    GridFunction gauss = make_gaussian(g, {pi, 0.0}, 0.3);
    auto [gp, gm] = slopes(gauss, pi);
    CHECK(gp < -8.0);
    CHECK(gm < -8.0);
    auto [gop, gom] = slopes(gauss, pi / 2.0); // window misses the bump
    CHECK(gop == opts.sentinel_slope);
    CHECK(gom == opts.sentinel_slope);

    // Monochromatic content reads regular whether it sits below the band
    // (k = 4: only the window kernel tail shows) or inside it (k = 100:
    // an isolated spectral peak fits steeply).
    GridFunction pw4 = make_plane_wave(g, {4, 0});
    auto [p4p, p4m] = slopes(pw4, pi);
    CHECK(p4p < -5.0);
    CHECK(p4m < -5.0);
    GridFunction pw100 = make_plane_wave(g, {100, 0});
    auto [pcp, pcm] = slopes(pw100, pi);
    CHECK(pcp < -5.0);
    CHECK(pcm < -5.0);

    GridFunction z = zero_function(g);
    auto [zp, zm] = slopes(z, pi);
    CHECK(zp == opts.sentinel_slope);
    CHECK(zm == opts.sentinel_slope);
}

TEST_CASE("detection plateau clusters to the jump location", "[microlocal]") {
    PeriodicGrid g{1, 1024, 2.0 * std::numbers::pi};
    const double pi = std::numbers::pi;
    GridFunction step = make_step(g, pi);
    DetectorOptions opts;

    WavefrontSet raw = detect_wavefront(step, opts);
    CHECK(raw.points.size() > 100); // every window touching the jump fires
    CHECK(raw.points.size() < 200);
    for (const auto& p : raw.points)
        CHECK(std::abs(periodic_diff(p.x[0], pi, g.L)) < 40.0 * g.dx());

    WavefrontSet cl = cluster_singular(raw, g, 72.0 * g.dx());
    REQUIRE(cl.points.size() == 2);
    bool plus = false, minus = false;
    for (const auto& p : cl.points) {
        CHECK(std::abs(periodic_diff(p.x[0], pi, g.L)) <= g.dx());
        CHECK(p.slope > opts.threshold);
        (p.dir[0] > 0.0 ? plus : minus) = true;
    }
    CHECK(plus);
    CHECK(minus);
}

TEST_CASE("clustering separates two distinct jumps", "[microlocal]") {
    PeriodicGrid g{1, 1024, 20.0};
    GridFunction u = make_step(g, 5.0);
    GridFunction v = make_step(g, 15.0);
    for (std::size_t j = 0; j < u.values.size(); ++j)
        u.values[j] += v.values[j];

    DetectorOptions opts;
    WavefrontSet cl =
        cluster_singular(detect_wavefront(u, opts), g, 72.0 * g.dx());
    REQUIRE(cl.points.size() == 4); // two locations, two directions each
    int near5 = 0, near15 = 0;
    for (const auto& p : cl.points) {
        if (std::abs(periodic_diff(p.x[0], 5.0, g.L)) <= g.dx()) ++near5;
        if (std::abs(periodic_diff(p.x[0], 15.0, g.L)) <= g.dx()) ++near15;
    }
    CHECK(near5 == 2);
    CHECK(near15 == 2);
}

TEST_CASE("wave front transport follows the bicharacteristics",
          "[microlocal]") {
    PeriodicGrid g{1, 256, 10.0};
    WavefrontSet wf0;
    wf0.points.push_back({{2.0, 0.0}, {1.0, 0.0}, -1.0});
    wf0.points.push_back({{7.5, 0.0}, {-1.0, 0.0}, -1.2});

    auto az = symbols::zero_symbol(1);
    BrownianPath zp = zero_path(1.0, 64);
    WavefrontSet id = push_forward_wf(az, az, zp, wf0, g);
    REQUIRE(id.points.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(id.points[i].x[0] == Catch::Approx(wf0.points[i].x[0]));
        CHECK(id.points[i].dir[0] == Catch::Approx(wf0.points[i].dir[0]));
        CHECK(id.points[i].slope == wf0.points[i].slope);
    }

    // Constant transport moves rays by c dw(t) + c' dt and leaves the
    // direction alone; the integrator is exact for constant fields.
    auto a = symbols::constant_transport({0.7});
    auto b = symbols::constant_transport({-0.2});
    BrownianPath w = sample_brownian(0xCAFEULL, 1.0, 512);
    double wT = w.cumulative.back();
    WavefrontSet fw = push_forward_wf(a, b, w, wf0, g);
    for (std::size_t i = 0; i < 2; ++i) {
        double expect = mod_pos(wf0.points[i].x[0] + 0.7 * wT - 0.2, g.L);
        CHECK(fw.points[i].x[0] == Catch::Approx(expect).margin(1e-12));
        CHECK(fw.points[i].dir[0] == Catch::Approx(wf0.points[i].dir[0]));
    }

    PeriodicGrid g2{2, 64, 5.0};
    WavefrontSet wf2;
    wf2.points.push_back({{1.0, 2.0}, {0.6, 0.8}, -0.5});
    auto a2 = symbols::constant_transport({0.3, -0.4});
    WavefrontSet fw2 =
        push_forward_wf(a2, symbols::zero_symbol(2), w, wf2, g2);
    CHECK(fw2.points[0].x[0] ==
          Catch::Approx(mod_pos(1.0 + 0.3 * wT, 5.0)).margin(1e-12));
    CHECK(fw2.points[0].x[1] ==
          Catch::Approx(mod_pos(2.0 - 0.4 * wT, 5.0)).margin(1e-12));
    CHECK(fw2.points[0].dir[0] == Catch::Approx(0.6));
    CHECK(fw2.points[0].dir[1] == Catch::Approx(0.8));
}

TEST_CASE("wave front comparison uses the periodic distance", "[microlocal]") {
    PeriodicGrid g{1, 256, 10.0};
    WavefrontSet pred, det;
    pred.points.push_back({{0.05, 0.0}, {1.0, 0.0}, 0.0});
    pred.points.push_back({{4.0, 0.0}, {-1.0, 0.0}, 0.0});
    det.points.push_back({{9.97, 0.0}, {1.0, 0.0}, -1.0}); // 0.08 across wrap
    det.points.push_back({{4.02, 0.0}, {-1.0, 0.0}, -1.0});

    WFCompareReport rep = compare_wf(pred, det, g, 0.2, 1.0);
    CHECK(rep.pass);
    CHECK(rep.matched == 2);
    CHECK(rep.missing == 0);
    CHECK(rep.spurious == 0);
    CHECK(rep.max_x_error == Catch::Approx(0.08));
    CHECK(rep.max_angle_error_deg == Catch::Approx(0.0).margin(1e-9));

    WFCompareReport tight = compare_wf(pred, det, g, 0.05, 1.0);
    CHECK_FALSE(tight.pass); // the wrapped pair is 0.08 apart
    CHECK(tight.matched == 1);
    CHECK(tight.missing == 1);
    CHECK(tight.spurious == 1);

    det.points.push_back({{8.0, 0.0}, {1.0, 0.0}, -1.0});
    WFCompareReport extra = compare_wf(pred, det, g, 0.2, 1.0);
    CHECK_FALSE(extra.pass);
    CHECK(extra.matched == 2);
    CHECK(extra.spurious == 1);

    WavefrontSet flip;
    flip.points.push_back({{4.02, 0.0}, {1.0, 0.0}, -1.0});
    WFCompareReport ang = compare_wf(pred, flip, g, 0.2, 1.0);
    CHECK(ang.matched <= 1); // opposite direction never matches
    CHECK(ang.missing >= 1);
    CHECK_FALSE(ang.pass);
}

TEST_CASE("line singularity reads conormal in two dimensions",
          "[microlocal][2d]") {
    PeriodicGrid g{2, 256, 32.0};
    const double a = g.L / 2.0;
    GridFunction u = make_line_singularity(g, a);
    DetectorOptions opts; // d = 2 defaults: 64-cell window, stride 16

    WavefrontSet wf = detect_wavefront(u, opts);
    REQUIRE(!wf.points.empty());
    std::set<long> rows;
    for (const auto& p : wf.points) {
        CHECK(std::abs(p.dir[0]) == Catch::Approx(1.0)); // conormal only
        CHECK(p.dir[1] == Catch::Approx(0.0).margin(1e-12));
        CHECK(std::abs(periodic_diff(p.x[0], a, g.L)) <= 32.0 * g.dx() + 1e-9);
        rows.insert(std::lround(p.x[1] / g.dx()));
    }
    CHECK(rows.size() == 16); // every scanned row sees the line

    for (long r : rows) { // fired windows centre on the line, row by row
        double s = 0.0;
        int n = 0;
        for (const auto& p : wf.points)
            if (std::lround(p.x[1] / g.dx()) == r && p.dir[0] > 0.0) {
                s += periodic_diff(p.x[0], a, g.L);
                ++n;
            }
        REQUIRE(n > 0);
        CHECK(std::abs(s / n) <= g.dx());
    }

    ConeBands bands = make_cone_bands(g, opts);
    SlopeProfile prof = slope_profile(u, {a, g.L / 4.0}, bands, opts);
    for (const auto& r : prof.rays) {
        bool normal = std::abs(std::abs(r.dir[0]) - 1.0) < 1e-12;
        if (normal)
            CHECK(r.slope > opts.threshold);
        else
            CHECK(r.slope < opts.threshold);
    }
}
