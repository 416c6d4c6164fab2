#include <catch2/catch_amalgamated.hpp>

#include <numbers>
#include <vector>

#include "wavelab/fft.hpp"
#include "wavelab/numerics.hpp"
#include "wavelab/rng.hpp"

using namespace wavelab;

namespace {

// Direct O(N^2) DFT used as an independent oracle for the FFT.
std::vector<cplx> dft_naive(const std::vector<cplx>& x) {
    const std::size_t n = x.size();
    std::vector<cplx> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        cplx s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double ang = -2.0 * std::numbers::pi * static_cast<double>(j * k) /
                         static_cast<double>(n);
            s += x[j] * cplx(std::cos(ang), std::sin(ang));
        }
        out[k] = s / static_cast<double>(n);
    }
    return out;
}

} // namespace

TEST_CASE("fft matches a direct DFT and inverts exactly", "[infra]") {
    SplitMix64 g(42);
    std::vector<cplx> x(64);
    for (auto& z : x) z = cplx(g.next_unit() - 0.5, g.next_unit() - 0.5);

    auto fast = dft_forward(x);
    auto slow = dft_naive(x);
    for (std::size_t k = 0; k < x.size(); ++k)
        REQUIRE(std::abs(fast[k] - slow[k]) < 1e-12);

    auto back = dft_inverse(fast);
    for (std::size_t j = 0; j < x.size(); ++j)
        REQUIRE(std::abs(back[j] - x[j]) < 1e-12);
}

TEST_CASE("2-D fft round-trips and matches tensor products", "[infra]") {
    const std::size_t N = 16;
    std::vector<cplx> u(N * N);
    for (std::size_t j1 = 0; j1 < N; ++j1)
        for (std::size_t j2 = 0; j2 < N; ++j2) {
            double x1 = 2.0 * std::numbers::pi * static_cast<double>(j1) / N;
            double x2 = 2.0 * std::numbers::pi * static_cast<double>(j2) / N;
            u[j1 * N + j2] = std::exp(cplx(0.0, 3.0 * x1 - 2.0 * x2));
        }
    auto c = dft2_forward(u, N);
    // e^{i(3 x1 - 2 x2)} has a single coefficient at (k1, k2) = (3, -2).
    for (std::size_t k1 = 0; k1 < N; ++k1)
        for (std::size_t k2 = 0; k2 < N; ++k2) {
            double expect = (k1 == 3 && k2 == N - 2) ? 1.0 : 0.0;
            REQUIRE(std::abs(c[k1 * N + k2] - expect) < 1e-12);
        }
    auto back = dft2_inverse(c, N);
    for (std::size_t i = 0; i < u.size(); ++i)
        REQUIRE(std::abs(back[i] - u[i]) < 1e-12);
}

TEST_CASE("splitmix64 streams are deterministic and index-addressable",
          "[infra]") {
    REQUIRE(standard_normal(7, 11) == standard_normal(7, 11));
    REQUIRE(standard_normal(7, 11) != standard_normal(7, 12));
    REQUIRE(subseed(1, "increments", 3) == subseed(1, "increments", 3));
    REQUIRE(subseed(1, "increments", 3) != subseed(1, "increments", 4));
    REQUIRE(subseed(1, "increments", 3) != subseed(2, "increments", 3));
    REQUIRE(subseed(1, "increments", 3) != subseed(1, "seeds", 3));
}

TEST_CASE("standard normal has the right first moments", "[infra]") {
    const std::size_t M = 200000;
    std::vector<double> z(M), z2(M);
    for (std::size_t i = 0; i < M; ++i) {
        z[i] = standard_normal(2024, i);
        z2[i] = z[i] * z[i];
    }
    double mean = pairwise_sum(z) / static_cast<double>(M);
    double var = pairwise_sum(z2) / static_cast<double>(M);
    // 5-sigma bands: sd(mean) = 1/sqrt(M), sd(var) = sqrt(2/M).
    REQUIRE(std::abs(mean) < 5.0 / std::sqrt(static_cast<double>(M)));
    REQUIRE(std::abs(var - 1.0) <
            5.0 * std::sqrt(2.0 / static_cast<double>(M)));
}

TEST_CASE("pairwise sum handles tiny and large blocks", "[infra]") {
    std::vector<double> v(1000, 0.1);
    REQUIRE(pairwise_sum(v) == Catch::Approx(100.0).epsilon(1e-13));
}

TEST_CASE("periodic helpers", "[infra]") {
    REQUIRE(mod_pos(-1.0, 8.0) == Catch::Approx(7.0));
    REQUIRE(periodic_diff(0.5, 7.5, 8.0) == Catch::Approx(1.0));
    std::vector<double> near_seam = {7.8, 0.2};
    REQUIRE(circular_mean(near_seam, 8.0) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("smooth cutoff has the required plateau and support", "[infra]") {
    REQUIRE(smooth_cutoff(0.0) == 1.0);
    REQUIRE(smooth_cutoff(1.0) == 1.0);
    REQUIRE(smooth_cutoff(-0.7) == 1.0);
    REQUIRE(smooth_cutoff(2.0) == 0.0);
    REQUIRE(smooth_cutoff(2.5) == 0.0);
    double prev = smooth_cutoff(1.0);
    for (double t = 1.05; t < 2.01; t += 0.05) {
        double cur = smooth_cutoff(t);
        REQUIRE(cur <= prev + 1e-15);
        prev = cur;
    }
}

TEST_CASE("least squares slope recovers an exact line", "[infra]") {
    std::vector<double> x = {1.0, 2.0, 3.0, 4.0};
    std::vector<double> y = {0.5, 2.5, 4.5, 6.5};
    REQUIRE(least_squares_slope(x, y) == Catch::Approx(2.0));
}
