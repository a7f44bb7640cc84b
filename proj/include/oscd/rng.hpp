#pragma once

// Portable deterministic random streams.
//
// Community resampling must produce byte-identical draw lists across runs and
// platforms, so nothing here depends on std::mt19937 or libstdc++
// distribution internals. The generator is xoshiro256** (Blackman/Vigna,
// public-domain reference constants) seeded through the splitmix64 finalizer.
// Integer draws use unbiased rejection; float draws use the 53-bit mantissa
// construction.

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string_view>

#include "oscd/error.hpp"

namespace oscd {

// splitmix64 finalizer step. Also used as the generic 64-bit mixer when
// deriving per-replicate substreams.
inline uint64_t splitmix64_next(uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// FNV-1a over bytes; stable fingerprint for spec strings and config echoes.
inline uint64_t fnv1a64(std::string_view bytes) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

class Rng {
public:
    explicit Rng(uint64_t seed) {
        uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64_next(sm);
    }

    // Stream seed for (run seed, spec fingerprint, replicate index).
    static Rng for_replicate(uint64_t seed, uint64_t fingerprint, uint64_t replicate) {
        uint64_t sm = seed;
        uint64_t h = splitmix64_next(sm);
        sm = h ^ fingerprint;
        h = splitmix64_next(sm);
        sm = h ^ replicate;
        h = splitmix64_next(sm);
        return Rng(h);
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Unbiased integer in [0, bound) by rejection on the top of the range.
    uint64_t next_below(uint64_t bound) {
        if (bound == 0) fail(ErrorCode::invalid_value, "rng bound must be positive");
        const uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    // Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; consumes exactly two uniforms per pair.
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_double();
        double u2 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    double next_lognormal(double mu, double sigma) {
        return std::exp(mu + sigma * next_normal());
    }

    // Index draw proportional to non-negative weights (linear cumulative scan).
    size_t next_weighted(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        if (!(total > 0.0)) fail(ErrorCode::degenerate_input, "weighted draw requires positive total weight");
        const double x = next_double() * total;
        double acc = 0.0;
        for (size_t i = 0; i + 1 < weights.size(); ++i) {
            acc += weights[i];
            if (x < acc) return i;
        }
        return weights.size() - 1;
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<uint64_t, 4> state_{};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace oscd
