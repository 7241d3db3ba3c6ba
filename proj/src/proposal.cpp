#include "shapfair/proposal.hpp"

#include <cmath>
#include <string>

#include "shapfair/errors.hpp"
#include "shapfair/sampler.hpp"

namespace shapfair {

void StratumStats::accumulate(int player, int cardinality, double sigma) {
    if (player < 0 || player >= static_cast<int>(count_.size()))
        throw invalid_argument_error("player index out of range");
    if (cardinality < 0 || cardinality >= n_)
        throw invalid_argument_error("cardinality out of range");
    count_[player][cardinality] += 1;
    sum_[player][cardinality] += sigma;
    sum_sq_[player][cardinality] += sigma * sigma;
}

long StratumStats::total_count(int player) const {
    long total = 0;
    for (long c : count_[player]) total += c;
    return total;
}

std::vector<double> floor_theta(std::vector<double> theta) {
    const int n = static_cast<int>(theta.size());
    const double floor = 1e-6 / n;
    double sum = 0.0;
    for (double& p : theta) {
        if (p < floor) p = floor;
        sum += p;
    }
    for (double& p : theta) p /= sum;
    return theta;
}

std::vector<double> mle_theta(const StratumStats& stats, int player, int n) {
    std::vector<double> w(n, -1.0);
    double observed_sum = 0.0;
    int observed = 0;
    for (int c = 0; c < n; ++c) {
        const long m = stats.count(player, c);
        if (m == 0) continue;
        w[c] = std::sqrt(stats.sum_sq(player, c) / static_cast<double>(m));
        observed_sum += w[c];
        ++observed;
    }
    if (observed == 0)
        throw insufficient_data_error("no samples for player " + std::to_string(player) +
                                      "; cannot fit a proposal");
    const double fill = observed_sum / observed;
    double total = 0.0;
    for (double& x : w) {
        if (x < 0.0) x = fill;
        total += x;
    }
    if (total <= 0.0) return uniform_theta(n);
    for (double& x : w) x /= total;
    return floor_theta(std::move(w));
}

std::vector<double> map_theta(const std::vector<double>& mle, double alpha, int n) {
    if (static_cast<int>(mle.size()) != n)
        throw invalid_argument_error("MLE weight vector has wrong length");
    if (!(alpha >= 0.0))
        throw invalid_argument_error("prior strength alpha must be >= 0");
    if (alpha == 0.0) return mle;
    std::vector<double> theta(n);
    const double denom = n + n * alpha;
    for (int c = 0; c < n; ++c) theta[c] = (n * mle[c] + alpha) / denom;
    return theta;
}

std::vector<double> oracle_theta(const ExactProfile& exact, int player) {
    const auto& moments = exact.mean_sq_by_cardinality.at(player);
    const int n = static_cast<int>(moments.size());
    std::vector<double> w(n);
    double total = 0.0;
    for (int c = 0; c < n; ++c) {
        w[c] = std::sqrt(std::max(0.0, moments[c]));
        total += w[c];
    }
    if (total <= 0.0) return uniform_theta(n); // null player: any proposal is optimal
    for (double& x : w) x /= total;
    return floor_theta(std::move(w));
}

double proposal_variance(const std::vector<double>& theta, const ExactProfile& exact,
                         int player) {
    const auto& mean_sq = exact.mean_sq_by_cardinality.at(player);
    const auto& mean = exact.mean_by_cardinality.at(player);
    const int n = static_cast<int>(mean_sq.size());
    if (static_cast<int>(theta.size()) != n)
        throw invalid_argument_error("theta has wrong length for this game");
    const double phi = exact.phi[player];
    double acc = 0.0;
    for (int c = 0; c < n; ++c) {
        if (!(theta[c] > 0.0))
            throw invalid_argument_error("proposal_variance needs strictly positive theta");
        acc += mean_sq[c] / (n * theta[c]) - 2.0 * mean[c] * phi;
    }
    return acc / n + phi * phi;
}


} // namespace shapfair
