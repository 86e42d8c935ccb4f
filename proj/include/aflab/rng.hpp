#pragma once

#include <cstdint>
#include <cmath>

#include "aflab/types.hpp"

namespace aflab {

/**
 * Deterministic, platform-independent random number generation.
 *
 * Stream derivation rule: substream(seed, stream) seeds a xoshiro256**
 * state from SplitMix64 applied to seed after mixing in the stream index.
 * Monte-Carlo loops use stream = trial index, so a trial's draws do not
 * depend on scheduling and parallel reductions stay reproducible.
 */
inline uint64_t splitmix64_next(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Rng {
public:
    explicit Rng(uint64_t seed, uint64_t stream = 0) {
        uint64_t sm = seed;
        // Decorrelate the stream index from the seed before expansion.
        sm ^= 0x6a09e667f3bcc909ULL + stream * 0x9e3779b97f4a7c15ULL;
        sm = splitmix64_next(sm) ^ stream;
        for (auto& word : state_) word = splitmix64_next(sm);
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

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform index in [0, n). Fixed-point multiply keeps the mapping
    /// platform-independent; the bias is n / 2^64 and irrelevant here.
    uint32_t next_below(uint32_t n) {
        return static_cast<uint32_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    /// One standard real normal draw (Box-Muller, one axis per call pair).
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_double();
        // Guard the log; u1 == 0 happens with probability 2^-53 per draw.
        while (u1 <= 0.0) u1 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = kTwoPi * next_double();
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    /// Circularly-symmetric complex normal with E|z|^2 = 1.
    cxd next_complex_normal() {
        const double a = next_normal();
        const double b = next_normal();
        return {a * M_SQRT1_2, b * M_SQRT1_2};
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    uint64_t state_[4]{};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace aflab
