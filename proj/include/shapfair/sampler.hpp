#pragma once

#include <vector>

#include "shapfair/coalition.hpp"
#include "shapfair/rng.hpp"

namespace shapfair {

/// One importance-sampling draw for a player: the chosen predecessor-set
/// cardinality and a predecessor set of exactly that size, drawn uniformly
/// among the size-c subsets of the other players.
struct Placement {
    int player = 0;
    int cardinality = 0;
    Coalition predecessors;
};

/// Fisher-Yates shuffle of 0..n-1; every ordering has probability 1/n!.
std::vector<int> sample_uniform_permutation(RngStream& rng, int n);

/// Validate that theta is a probability vector over cardinalities 0..n-1:
/// length n, entries >= 0 and finite, sum within 1e-9 of 1.
void require_distribution(const std::vector<double>& theta, int n);

/// Draw cardinality c ~ theta, then predecessors uniformly among the size-c
/// subsets of the players other than i. Induces probability
/// theta(|P|)/(n-1)! over full permutations.
Placement sample_placement(RngStream& rng, int player, int n,
                           const std::vector<double>& theta);

/// Importance weight 1/(n * theta(c)) that makes the weighted marginal
/// contribution an unbiased one-sample Shapley estimate. Errors on
/// theta(c) = 0: a drawn cardinality can never have zero mass.
double importance_weight(const std::vector<double>& theta, int cardinality, int n);

/// Uniform categorical over 0..n-1.
std::vector<double> uniform_theta(int n);

} // namespace shapfair
