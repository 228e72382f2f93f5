#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

// Deterministic randomness for the Monte Carlo machinery.
//
// Two kinds of draws are used:
//  - stream draws: a per-trial sequential generator for point counts and
//    positions (order of draws fixed by the sampling code);
//  - keyed draws: pure functions of (seed, indices, salt) for per-link
//    quantities (LoS states, fading). Keyed draws make the realized random
//    field independent of the traversal order, so pruned and exhaustive
//    association walk the exact same realization.
//
// Everything below is implemented directly (no std::distribution) so that
// results are bit-identical across standard libraries.

namespace udn::rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// 53-bit mantissa uniform in [0, 1).
inline double to_unit(std::uint64_t x) {
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

// xoshiro256++ sequential stream, seeded via splitmix64 expansion.
class Stream {
public:
    explicit Stream(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& w : s_) {
            x = splitmix64(x);
            w = x;
        }
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    double uniform01() { return to_unit(next_u64()); }

    // Unit-mean exponential.
    double exponential() { return -std::log1p(-uniform01()); }

    bool bernoulli(double p) { return uniform01() < p; }

    // Poisson draw; inversion for small means, Hormann's PTRS otherwise.
    std::uint64_t poisson(double mean) {
        if (mean < 0.0) throw std::domain_error("poisson: negative mean");
        if (mean == 0.0) return 0;
        if (mean < 30.0) return poisson_inversion(mean);
        return poisson_ptrs(mean);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t poisson_inversion(double mean) {
        const double limit = std::exp(-mean);
        double prod = uniform01();
        std::uint64_t n = 0;
        while (prod > limit) {
            prod *= uniform01();
            ++n;
        }
        return n;
    }

    std::uint64_t poisson_ptrs(double mean) {
        const double slam = std::sqrt(mean);
        const double loglam = std::log(mean);
        const double b = 0.931 + 2.53 * slam;
        const double a = -0.059 + 0.02483 * b;
        const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        const double v_r = 0.9277 - 3.6224 / (b - 2.0);
        for (;;) {
            const double u = uniform01() - 0.5;
            const double v = uniform01();
            const double us = 0.5 - std::fabs(u);
            const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
            if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(kf);
            if (kf < 0.0 || (us < 0.013 && v > us)) continue;
            if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
                kf * loglam - mean - std::lgamma(kf + 1.0))
                return static_cast<std::uint64_t>(kf);
        }
    }

    std::uint64_t s_[4];
};

// Stream seed for trial `index` of an experiment with master seed `master`.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(splitmix64(master ^ 0xA3C59AC2B8F1E9D5ULL) + index);
}

// Keyed draws: stateless functions of (seed, a, b, salt).
inline std::uint64_t keyed_u64(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                               std::uint64_t salt) {
    std::uint64_t x = splitmix64(seed ^ salt);
    x = splitmix64(x + a * 0x9E3779B97F4A7C15ULL);
    x = splitmix64(x + b * 0xC2B2AE3D27D4EB4FULL);
    return x;
}

inline double keyed_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                            std::uint64_t salt) {
    return to_unit(keyed_u64(seed, a, b, salt));
}

inline double keyed_exponential(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                                std::uint64_t salt) {
    return -std::log1p(-keyed_uniform(seed, a, b, salt));
}

} // namespace udn::rng
