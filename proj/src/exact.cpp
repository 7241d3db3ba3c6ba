#include "shapfair/exact.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace shapfair {

namespace {

constexpr double kClauseTol = 1e-12;

void require_capacity(const CooperativeGame& game, int cap, const char* what) {
    if (game.player_count() > cap)
        throw capacity_error(std::string(what) + " supports at most " + std::to_string(cap) +
                             " players, got " + std::to_string(game.player_count()));
}

// C(n, k) as an exact double; n <= 20 keeps every value well inside 2^53.
double binomial(int n, int k) {
    double b = 1.0;
    for (int j = 1; j <= k; ++j) b = b * (n - k + j) / j;
    return std::round(b);
}

} // namespace

std::vector<double> exact_shapley_permutations(const CooperativeGame& game) {
    require_capacity(game, kMaxPermutationPlayers, "permutation enumeration");
    const int n = game.player_count();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> sums(n, 0.0);
    double permutations = 0.0;
    do {
        Coalition predecessors;
        for (int i : order) {
            sums[i] += game.marginal_contribution(i, predecessors);
            predecessors = predecessors.with(i);
        }
        permutations += 1.0;
    } while (std::next_permutation(order.begin(), order.end()));
    for (double& s : sums) s /= permutations;
    return sums;
}

std::vector<double> exact_shapley_subsets(const CooperativeGame& game) {
    require_capacity(game, kMaxSubsetPlayers, "subset enumeration");
    const int n = game.player_count();
    // |S|!(n-1-|S|)!/n! = 1 / (n * C(n-1, |S|)), computed exactly.
    std::vector<double> weight(n);
    for (int c = 0; c < n; ++c) weight[c] = 1.0 / (n * binomial(n - 1, c));
    std::vector<double> phi(n, 0.0);
    const std::uint64_t full = (std::uint64_t{1} << n) - 1;
    for (std::uint64_t mask = 0; mask < full; ++mask) {
        const Coalition s{mask};
        const double vs = game.evaluate(s);
        const double w = weight[s.size()];
        for (int i = 0; i < n; ++i) {
            if (s.contains(i)) continue;
            phi[i] += w * (game.evaluate(s.with(i)) - vs);
        }
    }
    return phi;
}

ExactProfile exact_moments(const CooperativeGame& game) {
    require_capacity(game, kMaxPermutationPlayers, "moment enumeration");
    const int n = game.player_count();
    ExactProfile profile;
    profile.mean_by_cardinality.assign(n, std::vector<double>(n, 0.0));
    profile.mean_sq_by_cardinality.assign(n, std::vector<double>(n, 0.0));

    const std::uint64_t full = (std::uint64_t{1} << n) - 1;
    for (std::uint64_t mask = 0; mask < full; ++mask) {
        const Coalition s{mask};
        const double vs = game.evaluate(s);
        const int c = s.size();
        for (int i = 0; i < n; ++i) {
            if (s.contains(i)) continue;
            const double sigma = game.evaluate(s.with(i)) - vs;
            profile.mean_by_cardinality[i][c] += sigma;
            profile.mean_sq_by_cardinality[i][c] += sigma * sigma;
        }
    }
    // Within a stratum every predecessor set of size c is equally likely.
    profile.phi.assign(n, 0.0);
    profile.variance_uniform.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double mean = 0.0, mean_sq = 0.0;
        for (int c = 0; c < n; ++c) {
            const double sets = binomial(n - 1, c);
            profile.mean_by_cardinality[i][c] /= sets;
            profile.mean_sq_by_cardinality[i][c] /= sets;
            mean += profile.mean_by_cardinality[i][c];
            mean_sq += profile.mean_sq_by_cardinality[i][c];
        }
        profile.phi[i] = mean / n;
        profile.variance_uniform[i] = std::max(0.0, mean_sq / n - profile.phi[i] * profile.phi[i]);
    }
    return profile;
}

AxiomClauses check_axiom_clauses(const CooperativeGame& game, int i, int j) {
    require_capacity(game, kMaxSubsetPlayers, "clause check");
    const int n = game.player_count();
    if (i == j) throw invalid_argument_error("clause check needs two distinct players");
    if (i < 0 || i >= n || j < 0 || j >= n)
        throw invalid_argument_error("player index out of range");

    AxiomClauses result;
    result.symmetric = true;
    bool all_geq = true;
    bool some_strict = false;
    // Enumerate subsets of N \ {i, j} by spreading the bits of a compact index.
    std::vector<int> others;
    for (int p = 0; p < n; ++p)
        if (p != i && p != j) others.push_back(p);
    const std::uint64_t count = std::uint64_t{1} << others.size();
    for (std::uint64_t index = 0; index < count; ++index) {
        Coalition c;
        for (std::size_t b = 0; b < others.size(); ++b)
            if ((index >> b) & 1u) c = c.with(others[b]);
        const double vi = game.evaluate(c.with(i));
        const double vj = game.evaluate(c.with(j));
        if (std::abs(vi - vj) > kClauseTol) result.symmetric = false;
        if (vi < vj - kClauseTol) all_geq = false;
        if (vi > vj + kClauseTol) some_strict = true;
        if (!result.symmetric && !all_geq) break;
    }
    result.strictly_desirable = all_geq && some_strict;
    return result;
}

} // namespace shapfair
