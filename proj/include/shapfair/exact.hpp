#pragma once

#include <vector>

#include "shapfair/game.hpp"

namespace shapfair {

/// Exact per-player statistics of the marginal contribution under uniform
/// random permutations, with a per-cardinality breakdown.
struct ExactProfile {
    std::vector<double> phi;              // exact Shapley values
    std::vector<double> variance_uniform; // V[sigma_i(pi)], pi uniform
    // mean_by_cardinality[i][c]    = E[sigma_i | predecessor set of size c]
    // mean_sq_by_cardinality[i][c] = E[sigma_i^2 | predecessor set of size c]
    std::vector<std::vector<double>> mean_by_cardinality;
    std::vector<std::vector<double>> mean_sq_by_cardinality;
};

struct AxiomClauses {
    bool symmetric = false;          // v(C+i) == v(C+j) for every C
    bool strictly_desirable = false; // i strictly more desirable than j
};

constexpr int kMaxPermutationPlayers = 10;
constexpr int kMaxSubsetPlayers = 20;

/// Shapley values by full enumeration of all n! permutations. n <= 10.
std::vector<double> exact_shapley_permutations(const CooperativeGame& game);

/// Shapley values by the subset formula
/// sum_S |S|!(n-1-|S|)!/n! (v(S+i) - v(S)). n <= 20.
std::vector<double> exact_shapley_subsets(const CooperativeGame& game);

/// Per-player, per-cardinality first and second moments of sigma. n <= 10.
ExactProfile exact_moments(const CooperativeGame& game);

/// Brute-force check of the symmetry and strict-desirability clauses for an
/// ordered pair (i, j). Equality uses absolute tolerance 1e-12; strictness
/// requires an excess beyond it. n <= 20.
AxiomClauses check_axiom_clauses(const CooperativeGame& game, int i, int j);

} // namespace shapfair
