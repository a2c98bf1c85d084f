#pragma once

#include <cstdint>
#include <string_view>

namespace annoqa {

// All randomness in the project flows through these generators. They are
// hand-rolled (splitmix64 seeding a xoshiro256**) because the standard
// library distributions are implementation-defined and would break the
// byte-determinism contract across platforms.

inline uint64_t splitmix64_next(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// One-shot mix of two 64-bit values into a stream seed.
inline uint64_t mix_seed(uint64_t seed, uint64_t stream) {
    uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL + (stream << 1));
    uint64_t a = splitmix64_next(s);
    uint64_t b = splitmix64_next(s);
    return a ^ (b >> 1);
}

inline uint64_t fnv1a64(std::string_view text) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

class Rng {
public:
    explicit Rng(uint64_t seed) {
        uint64_t sm = seed;
        for (auto& word : s_) word = splitmix64_next(sm);
    }

    uint64_t next() {
        const uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1).
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform in [0, bound) without modulo bias (Lemire reduction).
    uint64_t bounded(uint64_t bound) {
        return static_cast<uint64_t>(
            (static_cast<__uint128_t>(next()) * static_cast<__uint128_t>(bound)) >> 64);
    }

    // Approximately standard normal via an Irwin-Hall 12-sum. Uses only
    // additions of uniforms, so the result is bit-identical on every
    // IEEE-754 platform (Box-Muller would depend on libm rounding).
    double next_gaussian() {
        double sum = 0.0;
        for (int i = 0; i < 12; ++i) sum += next_double();
        return sum - 6.0;
    }

    // Knuth Poisson sampler. exp(-lambda) is computed with a local series
    // so the acceptance threshold does not depend on libm.
    uint64_t next_poisson(double lambda) {
        if (lambda <= 0.0) return 0;
        const double limit = exp_neg(lambda);
        uint64_t k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= next_double();
        } while (p > limit);
        return k - 1;
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    static double exp_neg(double lambda) {
        // exp(lambda) by Taylor series with a fixed convergence rule;
        // every step is a basic IEEE operation.
        double term = 1.0;
        double sum = 1.0;
        for (int k = 1; k < 600; ++k) {
            term *= lambda / static_cast<double>(k);
            sum += term;
            if (term < sum * 1e-18) break;
        }
        return 1.0 / sum;
    }

    uint64_t s_[4];
};

}  // namespace annoqa
