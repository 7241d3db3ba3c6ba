#pragma once

#include <vector>

#include "shapfair/exact.hpp"

namespace shapfair {

/// Per (player, cardinality) accumulator for marginal-contribution samples:
/// how many landed in the stratum and their sum / sum of squares.
class StratumStats {
  public:
    StratumStats(int players, int n)
        : n_(n), count_(players, std::vector<long>(n, 0)),
          sum_(players, std::vector<double>(n, 0.0)),
          sum_sq_(players, std::vector<double>(n, 0.0)) {}

    void accumulate(int player, int cardinality, double sigma);

    int cardinalities() const { return n_; }
    long count(int player, int c) const { return count_[player][c]; }
    double sum(int player, int c) const { return sum_[player][c]; }
    double sum_sq(int player, int c) const { return sum_sq_[player][c]; }
    long total_count(int player) const;

  private:
    int n_;
    std::vector<std::vector<long>> count_;
    std::vector<std::vector<double>> sum_;
    std::vector<std::vector<double>> sum_sq_;
};

enum class ProposalSource { mle, map, uniform, oracle };

/// A per-player categorical proposal over predecessor-set cardinalities.
/// Every theta used for sampling is floored (no zero mass) and sums to 1.
struct ProposalParams {
    std::vector<std::vector<double>> theta; // [player][cardinality]
    double alpha = 0.0;
    ProposalSource source = ProposalSource::uniform;
};

/// Probability floor applied to every sampling distribution: entries are
/// raised to at least 1e-6/n and the vector renormalised, keeping the
/// estimator's support equal to the full permutation set.
std::vector<double> floor_theta(std::vector<double> theta);

/// MLE of the optimal cardinality distribution from bootstrap samples:
/// w_c proportional to sqrt(mean sigma^2) in stratum c. Strata that saw no
/// samples get the mean of the observed weights. Errors if the player has
/// no samples at all.
std::vector<double> mle_theta(const StratumStats& stats, int player, int n);

/// Dirichlet-prior MAP blend toward uniform:
/// theta_c = (n*w_c + alpha) / (n + n*alpha). alpha = 0 returns w unchanged.
std::vector<double> map_theta(const std::vector<double>& mle, double alpha, int n);

/// The true optimal proposal from exact stratum second moments, floored the
/// same way as the learned one. A null player (all strata zero) gets the
/// uniform proposal.
std::vector<double> oracle_theta(const ExactProfile& exact, int player);

/// Probability-adjusted variance of the one-sample weighted estimator under
/// theta: (1/n) sum_c (E_c[s^2]/(n theta_c) - 2 E_c[s] phi) + phi^2.
double proposal_variance(const std::vector<double>& theta, const ExactProfile& exact,
                         int player);

} // namespace shapfair
