#pragma once

#include <cstdint>

namespace shapfair {

/// Deterministic, platform-independent random stream.
///
/// Generator: xoshiro256++ 1.0 (Blackman & Vigna), state seeded from
/// (seed, stream_id) through splitmix64. The same (seed, stream_id) and
/// call sequence produce the same outputs on every platform; integer and
/// unit-interval draws below avoid std::uniform_*_distribution on purpose,
/// since those are implementation-defined.
///
/// Streams are cheap values: give each (player, trial) its own stream_id
/// and the draws of one logical task never perturb another's.
class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id) {
        std::uint64_t x = seed ^ (0x9e3779b97f4a7c15ULL * (stream_id + 1));
        for (auto& word : state_) word = splitmix64(x);
        // All-zero state is invalid for xoshiro; splitmix64 of anything
        // cannot produce four zero words in a row, but guard regardless.
        if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Unbiased integer in [0, bound). bound must be >= 1.
    std::uint64_t next_below(std::uint64_t bound) {
        // Rejection on the top of the range keeps the draw exactly uniform.
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x = next_u64();
        while (x >= limit) x = next_u64();
        return x % bound;
    }

    /// Double in [0, 1) with 53 uniform bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    static std::uint64_t splitmix64(std::uint64_t& x) {
        std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_[4];
};

} // namespace shapfair
