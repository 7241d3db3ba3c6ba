#pragma once

#include <string>
#include <vector>

#include "shapfair/game.hpp"

namespace shapfair {

struct VerifyResult {
    std::string suite;
    bool pass = true;
    std::vector<std::string> lines; // one measurement vs tolerance per line
};

/// Permutation-enumeration vs subset-formula Shapley agreement on 100 random
/// games with n in 3..8, 1e-12 relative tolerance.
VerifyResult verify_oracle();

/// Mean estimate over 1000 seeds on glove (m'=5, m=60) within 4 combined
/// standard errors of the exact values, for MC, greedy and GAE
/// with alpha in {0, 2, 100}.
VerifyResult verify_unbiased();

/// Mean minimum fidelity score over 30 seeds at m=2000 on the heterogeneous
/// benchmark game: GAE >= greedy >= MC and GAE/MC > 1.5.
VerifyResult verify_prop3();

/// Empirical violation frequency vs the concentration bound on glove under
/// MC, m_i = 50, epsilon1 in {0.5, 1, 2}, 2000 trials.
VerifyResult verify_chebyshev();

/// Optimal-proposal variance never above uniform on 50 random games (n <= 6),
/// strictly below when the stratum second moments differ by more than 10%.
VerifyResult verify_proposal();

VerifyResult run_verify_suite(const std::string& name);

/// Fixed 8-player fixture with two 4-player blocks: a pure-threshold block
/// (low invariability, cardinality-concentrated marginals) and a
/// near-additive block with a small threshold bump (high invariability).
/// Per-player marginal variances differ by more than 10x across blocks.
CooperativeGame heterogeneous_benchmark_game();

} // namespace shapfair
