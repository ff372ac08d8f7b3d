// rng.hpp -- deterministic random number generation.
//
// Everything here is hand-rolled on top of splitmix64 so that results are
// bit-identical across platforms and standard library versions (std::
// distributions are implementation-defined). Two independent streams per
// replica (environment, walker) are derived with split().
#pragma once

#include <cmath>
#include <cstdint>

namespace sepwalk {

// splitmix64: tiny, passes BigCrush on its own, and the de facto standard
// seed expander. Used both as the working generator and for seed derivation.
struct Rng {
    uint64_t state = 0x9E3779B97F4A7C15ull;

    explicit Rng(uint64_t seed = 0x9E3779B97F4A7C15ull) : state(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // uniform in [0,1) with 53 random bits
    double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n), Lemire's multiply-shift with rejection
    uint64_t next_below(uint64_t n) {
        while (true) {
            uint64_t x = next_u64();
            __uint128_t m = (__uint128_t)x * n;
            uint64_t lo = (uint64_t)m;
            if (lo >= n) return (uint64_t)(m >> 64);
            // short rejection path removes the (tiny) modulo bias
            uint64_t thresh = (0 - n) % n;
            if (lo >= thresh) return (uint64_t)(m >> 64);
        }
    }

    bool next_bernoulli(double p) { return next_double() < p; }

    // Exp(rate)
    double next_exponential(double rate) {
        return -std::log1p(-next_double()) / rate;
    }

    double next_normal() {
        // polar Marsaglia; the spare is dropped to keep the state a pure
        // function of the call count
        while (true) {
            double u = 2.0 * next_double() - 1.0;
            double v = 2.0 * next_double() - 1.0;
            double s = u * u + v * v;
            if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }

    uint64_t next_poisson(double lambda);
};

// Pure seed-derivation function: stream i of a master seed. Documented
// contract: split(m, i) depends only on (m, i), so growing a replica
// ensemble never reseeds existing replicas.
inline uint64_t split_seed(uint64_t master, uint64_t i) {
    Rng r(master ^ (0xA0761D6478BD642Full * (i + 1)));
    r.next_u64();
    return r.next_u64();
}

}  // namespace sepwalk
