#include "shapfair/sampler.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "shapfair/errors.hpp"

namespace shapfair {

std::vector<int> sample_uniform_permutation(RngStream& rng, int n) {
    if (n < 1) throw invalid_argument_error("permutation needs n >= 1");
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (int i = n - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(i) + 1));
        std::swap(order[i], order[j]);
    }
    return order;
}

void require_distribution(const std::vector<double>& theta, int n) {
    if (static_cast<int>(theta.size()) != n)
        throw invalid_argument_error("theta must have one entry per cardinality 0..n-1");
    double sum = 0.0;
    for (double p : theta) {
        if (!(p >= 0.0) || !std::isfinite(p))
            throw invalid_argument_error("theta entries must be finite and >= 0");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw invalid_argument_error("theta must sum to 1, got " + std::to_string(sum));
}

Placement sample_placement(RngStream& rng, int player, int n,
                           const std::vector<double>& theta) {
    require_distribution(theta, n);
    const double u = rng.next_unit();
    int c = n - 1;
    double cumulative = 0.0;
    for (int k = 0; k < n; ++k) {
        cumulative += theta[k];
        if (u < cumulative) {
            c = k;
            break;
        }
    }
    // Partial Fisher-Yates over the other players: the first c entries of a
    // full shuffle are a uniform size-c subset once order is discarded.
    std::vector<int> others;
    others.reserve(n - 1);
    for (int p = 0; p < n; ++p)
        if (p != player) others.push_back(p);
    Placement placement;
    placement.player = player;
    placement.cardinality = c;
    for (int k = 0; k < c; ++k) {
        const int j = k + static_cast<int>(rng.next_below(others.size() - k));
        std::swap(others[k], others[j]);
        placement.predecessors = placement.predecessors.with(others[k]);
    }
    return placement;
}

double importance_weight(const std::vector<double>& theta, int cardinality, int n) {
    if (cardinality < 0 || cardinality >= static_cast<int>(theta.size()))
        throw invalid_argument_error("cardinality out of range for theta");
    const double p = theta[cardinality];
    if (p <= 0.0)
        throw invalid_argument_error(
            "zero-probability cardinality " + std::to_string(cardinality) +
            " cannot have been drawn; the proposal must be floored");
    return 1.0 / (n * p);
}

std::vector<double> uniform_theta(int n) {
    return std::vector<double>(n, 1.0 / n);
}

} // namespace shapfair
