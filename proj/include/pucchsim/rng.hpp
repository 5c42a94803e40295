// SPDX-License-Identifier: Apache-2.0
//
// Deterministic random number streams. Every consumer derives its own
// stream from (seed, key...) so results do not depend on evaluation
// order or worker count.

#pragma once

#include <cstdint>
#include <cmath>

#include "pucchsim/common.hpp"

namespace pucchsim {

namespace detail {
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
}  // namespace detail

// xoshiro256** with splitmix-expanded seeding. Self-contained so that
// streams are bit-identical across standard libraries.
class Rng {
public:
    explicit Rng(uint64_t seed) {
        uint64_t s = seed;
        for (auto& w : state_) {
            s = detail::splitmix64(s);
            w = s;
        }
        has_spare_ = false;
    }

    // Derive an independent stream from a seed and up to three keys.
    static Rng derive(uint64_t seed, uint64_t k0, uint64_t k1 = 0, uint64_t k2 = 0) {
        uint64_t s = detail::splitmix64(seed ^ 0x5bf03635d0d6a4e5ULL);
        s = detail::splitmix64(s ^ detail::splitmix64(k0));
        s = detail::splitmix64(s ^ detail::splitmix64(k1 + 0x9e3779b97f4a7c15ULL));
        s = detail::splitmix64(s ^ detail::splitmix64(k2 + 0x7f4a7c159e3779b9ULL));
        return Rng(s);
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

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller (explicit, stdlib-independent).
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(two_pi * u2);
        has_spare_ = true;
        return r * std::cos(two_pi * u2);
    }

    // Circularly-symmetric complex Gaussian with E|x|^2 = variance.
    cd cgaussian(double variance) {
        const double s = std::sqrt(variance / 2.0);
        return {s * gaussian(), s * gaussian()};
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    uint64_t state_[4];
    double spare_ = 0.0;
    bool has_spare_;
};

}  // namespace pucchsim
