#include <doctest.h>

#include <cmath>

#include "fedsim/rng.hpp"

using namespace fedsim;

TEST_CASE("derived streams are reproducible and tag-sensitive") {
    RngStream a = RngStream::derive(42, {1, 2});
    RngStream b = RngStream::derive(42, {1, 2});
    RngStream c = RngStream::derive(42, {2, 1});
    RngStream d = RngStream::derive(43, {1, 2});
    for (int i = 0; i < 16; ++i) CHECK(a.next_u64() == b.next_u64());
    bool differs_c = false, differs_d = false;
    RngStream a2 = RngStream::derive(42, {1, 2});
    for (int i = 0; i < 16; ++i) {
        std::uint64_t x = a2.next_u64();
        if (x != c.next_u64()) differs_c = true;
        if (x != d.next_u64()) differs_d = true;
    }
    CHECK(differs_c);
    CHECK(differs_d);
}

TEST_CASE("uniform01 lies in [0,1) and uniform_centered in open (-1/2,1/2)") {
    RngStream rng = RngStream::derive(7, {0});
    for (int i = 0; i < 100000; ++i) {
        double u = rng.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        double v = rng.uniform_centered();
        CHECK(v > -0.5);
        CHECK(v < 0.5);
    }
}

TEST_CASE("laplace draw reproduces the inverse-CDF formula applied to the raw stream") {
    RngStream rng = RngStream::derive(99, {3});
    RngStream clone = RngStream::derive(99, {3});
    const double b = 1.7;
    for (int i = 0; i < 1000; ++i) {
        double u = clone.uniform_centered();
        double s = (u > 0.0) ? 1.0 : (u < 0.0 ? -1.0 : 0.0);
        double expected = -b * s * std::log(1.0 - 2.0 * std::abs(u));
        CHECK(rng.laplace(b) == expected);
    }
}

TEST_CASE("uniform(lo,hi) stays inside the interval") {
    RngStream rng = RngStream::derive(5, {8});
    for (int i = 0; i < 10000; ++i) {
        double x = rng.uniform(-0.05, 0.05);
        CHECK(x >= -0.05);
        CHECK(x < 0.05);
    }
}

TEST_CASE("below(n) covers 0..n-1") {
    RngStream rng = RngStream::derive(11, {12});
    bool seen[5] = {};
    for (int i = 0; i < 1000; ++i) {
        auto v = rng.below(5);
        CHECK(v < 5);
        seen[v] = true;
    }
    for (bool s : seen) CHECK(s);
}
