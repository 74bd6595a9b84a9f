#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace fedsim {

// splitmix64 finalizer, used to fold seeds and tags into stream keys.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Deterministic random stream. mt19937_64 output is fixed by the standard
// and every derived quantity below is computed from raw 64-bit words, so
// sequences are identical across platforms and compilers.
class RngStream {
public:
    explicit RngStream(std::uint64_t key) : gen_(key) {}

    // Independent stream for (seed, tag, tag, ...). Streams derived from
    // distinct tag tuples never share state, which makes results
    // independent of scheduling order.
    static RngStream derive(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
        std::uint64_t h = mix64(seed);
        for (std::uint64_t t : tags) h = mix64(h ^ mix64(t));
        return RngStream(h);
    }

    std::uint64_t next_u64() { return gen_(); }

    // Uniform on [0, 1).
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform on the open interval (-1/2, 1/2); never hits the endpoints,
    // keeping the Laplace inverse CDF finite.
    double uniform_centered() {
        return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53 - 0.5;
    }

    // Zero-location Laplace via inverse CDF: x = -b * sign(u) * ln(1 - 2|u|).
    double laplace(double b) {
        double u = uniform_centered();
        double s = (u > 0.0) ? 1.0 : (u < 0.0 ? -1.0 : 0.0);
        return -b * s * std::log(1.0 - 2.0 * std::abs(u));
    }

    // Zero-mean Gaussian via Box-Muller.
    double normal(double sigma) {
        double u1 = uniform01();
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(1.0 - u1));
        return sigma * r * std::cos(2.0 * M_PI * u2);
    }

    // Integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // modulo bias is negligible for n << 2^64 and keeps draws portable
        return gen_() % n;
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace fedsim
