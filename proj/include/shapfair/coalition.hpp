#pragma once

#include <bit>
#include <cstdint>
#include <string>

#include "shapfair/errors.hpp"

namespace shapfair {

/// A coalition of players 0..n-1, encoded as a bitmask. Bit i set means
/// player i is a member. The empty coalition is mask 0.
struct Coalition {
    std::uint64_t mask = 0;

    constexpr Coalition() = default;
    constexpr explicit Coalition(std::uint64_t m) : mask(m) {}

    static constexpr Coalition empty() { return Coalition{}; }

    constexpr bool contains(int player) const { return (mask >> player) & 1u; }
    constexpr int size() const { return std::popcount(mask); }
    constexpr bool is_empty() const { return mask == 0; }

    constexpr Coalition with(int player) const {
        return Coalition{mask | (std::uint64_t{1} << player)};
    }
    constexpr Coalition without(int player) const {
        return Coalition{mask & ~(std::uint64_t{1} << player)};
    }

    constexpr bool valid_for(int n) const {
        return n >= 64 || (mask >> n) == 0;
    }

    friend constexpr bool operator==(Coalition a, Coalition b) { return a.mask == b.mask; }
    friend constexpr bool operator!=(Coalition a, Coalition b) { return a.mask != b.mask; }
};

inline void require_valid(Coalition c, int n) {
    if (!c.valid_for(n))
        throw invalid_argument_error("coalition " + std::to_string(c.mask) +
                                     " has members outside 0.." + std::to_string(n - 1));
}

} // namespace shapfair
