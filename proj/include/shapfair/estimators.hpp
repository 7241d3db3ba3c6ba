#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "shapfair/game.hpp"
#include "shapfair/proposal.hpp"
#include "shapfair/rng.hpp"

namespace shapfair {

/// Online statistics of one player's weighted marginal-contribution samples.
/// mean is the running Shapley estimate phi_hat; m2 is Welford's sum of
/// squared deviations, so the sample variance is m2/(m-1).
struct RunningEstimate {
    int player = 0;
    long m = 0;
    double mean = 0.0;
    double m2 = 0.0;
    bool includes_bootstrap = false;

    void update(double weighted_sample);
    double variance() const; // s^2, needs m >= 2
};

enum class FsFormula {
    def2, // m * (|mean| + xi)^2 / s^2
    alg1, // m * (mean + xi)^2 / s^2, the signed variant
};

enum class Selection { greedy_min_fs, delta_p };

constexpr double kInfiniteFs = std::numeric_limits<double>::infinity();

/// Invariability: the fidelity score a single sample would earn.
double invariability(double mean, double sample_variance, double xi,
                     FsFormula formula = FsFormula::def2);

/// Fidelity score m * (|mean| + xi)^2 / s^2. Returns the +inf sentinel when
/// the observed variance is zero; throws insufficient_data_error for m < 2.
double fidelity_score(const RunningEstimate& est, double xi,
                      FsFormula formula = FsFormula::def2);

/// Multiplicative improvement of the independent-case fairness bound from
/// granting one extra sample to a player with invariability r_hat and m_i
/// samples. Throws degenerate_bound_error when the denominator vanishes.
double delta_p(double r_hat, long m_i, double epsilon1);

struct GaeConfig {
    long m_bootstrap = 20;  // per-player bootstrap permutations (>= 2)
    long m_budget = 2000;   // main-loop budget
    double xi = 1e-3;       // FS offset (> 0)
    double alpha = 2.0;     // Dirichlet prior strength (>= 0)
    Selection selection = Selection::greedy_min_fs;
    double epsilon1 = 0.0;  // required only for delta_p selection
    std::uint64_t seed = 0;
    FsFormula fs_formula = FsFormula::def2;
    bool shared_bootstrap = false; // one permutation reused for all players
    bool shared_proposal = false;  // pool strata across players (ablation)
    long refit_every = 0;          // refit theta every k picks; 0 = frozen
    bool record_trace = false;

    void validate() const;
};

struct TraceRecord {
    long step = 0;
    int player = 0;
    int cardinality = 0;
    std::uint64_t predecessors = 0;
    double sigma = 0.0;
    double weight = 1.0;
    double fs_after = 0.0;
};

struct EstimationResult {
    std::vector<double> phi_hat;
    std::vector<long> m_per_player;   // sums to n*m_bootstrap + m_budget
    std::vector<double> fs_per_player;
    ProposalParams proposal;          // theta actually sampled from
    std::vector<TraceRecord> trace;   // per main-loop step, when recorded
};

struct BootstrapResult {
    std::vector<RunningEstimate> estimates;
    StratumStats stats;
};

/// Uniform bootstrap of m' samples per player (weight 1). Permutations are
/// drawn from each player's own stream, so the resulting estimates are
/// independent across players; shared mode reuses one permutation for all n
/// marginals instead.
BootstrapResult bootstrap(const CooperativeGame& game, const GaeConfig& config,
                          std::uint64_t trial = 0);

/// Monte Carlo baseline: bootstrap plus an equal split of the main budget
/// (floor(m/n) each, remainder to the lowest indices), uniform sampling.
EstimationResult estimate_mc(const CooperativeGame& game, const GaeConfig& config,
                             std::uint64_t trial = 0);

/// Greedy selection with uniform sampling: every step funds the player with
/// the lowest current fidelity score.
EstimationResult estimate_greedy(const CooperativeGame& game, const GaeConfig& config,
                                 std::uint64_t trial = 0);

/// Greedy active estimation: bootstrap, fit the per-player cardinality
/// proposal (MLE + Dirichlet MAP), then greedy selection with importance
/// sampling, weight 1/(n theta(c)).
EstimationResult estimate_gae(const CooperativeGame& game, const GaeConfig& config,
                              std::uint64_t trial = 0);

/// Greedy budget allocation against fixed, known invariabilities: repeatedly
/// grant one sample to argmin m_i * r_i. Returns the final per-player sample
/// counts; fidelity scores are m_i * r_i.
std::vector<long> greedy_fixed_r_allocation(const std::vector<double>& r, long m);

/// The rng stream a given (trial, player) draws from.
RngStream player_stream(std::uint64_t seed, std::uint64_t trial, int player);

} // namespace shapfair
