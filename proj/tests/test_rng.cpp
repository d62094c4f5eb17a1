#include <doctest.h>

#include <cmath>

#include "kerrsim/rng.hpp"

using namespace kerrsim;

TEST_CASE("philox output is deterministic and key-sensitive") {
    auto a = philox4x32({1, 2, 3, 4}, {5, 6});
    auto b = philox4x32({1, 2, 3, 4}, {5, 6});
    CHECK(a == b);
    auto c = philox4x32({1, 2, 3, 4}, {5, 7});
    CHECK(a != c);
    auto d = philox4x32({2, 2, 3, 4}, {5, 6});
    CHECK(a != d);
}

TEST_CASE("uniform mapping stays strictly inside (0,1)") {
    CHECK(u32_to_unit(0u) > 0.0);
    CHECK(u32_to_unit(0xFFFFFFFFu) < 1.0);
    CHECK(u32_to_unit(0x80000000u) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("gaussian pairs are reproducible") {
    auto a = gaussian_pair(42, 3, 7, 123456789ull);
    auto b = gaussian_pair(42, 3, 7, 123456789ull);
    CHECK(a.first == b.first);
    CHECK(a.second == b.second);
    auto c = gaussian_pair(43, 3, 7, 123456789ull);
    CHECK(a.first != c.first);
}

TEST_CASE("gaussian samples have unit variance within 1% over 1e6 draws") {
    const int n = 500000; // pairs -> 1e6 samples
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        auto [x, y] = gaussian_pair(2024, 0, 0, static_cast<uint64_t>(i));
        sum += x + y;
        sum2 += x * x + y * y;
    }
    double mean = sum / (2.0 * n);
    double var = sum2 / (2.0 * n) - mean * mean;
    CHECK(std::abs(mean) < 0.005);
    CHECK(var == doctest::Approx(1.0).epsilon(0.01));
    // noise calibration: scaled by 1/(2 sqrt(dt)), the per-quadrature variance
    // of the step noise is 1/(4 dt)
    double dt = 5e-4;
    double sigma = 1.0 / (2.0 * std::sqrt(dt));
    CHECK(var * sigma * sigma == doctest::Approx(1.0 / (4.0 * dt)).epsilon(0.01));
}

TEST_CASE("distinct input and trajectory streams are uncorrelated") {
    const int n = 100000;
    double c01 = 0.0, c0t = 0.0, v = 0.0;
    for (int i = 0; i < n; ++i) {
        uint64_t step = static_cast<uint64_t>(i);
        double a = gaussian_pair(7, 0, 0, step).first;
        double b = gaussian_pair(7, 1, 0, step).first;
        double c = gaussian_pair(7, 0, 1, step).first;
        c01 += a * b;
        c0t += a * c;
        v += a * a;
    }
    // empirical cross-correlation below a 3 sigma bound (~3/sqrt(n))
    double bound = 3.0 / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(c01 / v) < bound);
    CHECK(std::abs(c0t / v) < bound);
}

TEST_CASE("counter splitting covers 64-bit steps") {
    // steps differing only in the high 32 bits must produce different noise
    auto lo = gaussian_pair(1, 0, 0, 5ull);
    auto hi = gaussian_pair(1, 0, 0, 5ull | (1ull << 32));
    CHECK(lo.first != hi.first);
}
