#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "shapfair/estimators.hpp"
#include "shapfair/exact.hpp"

namespace shapfair {

/// Per-player fidelity diagnostics of one estimation run.
struct FidelityReport {
    std::vector<double> fs;            // f_i, +inf sentinel allowed
    std::vector<double> invariability; // r_hat_i = f_i / m_i
    double min_fs = 0.0;
    double xi = 0.0;
};

FidelityReport fidelity_report(const EstimationResult& result, double xi);

/// Probability bound on joint unfairness at a given epsilon1, driven by the
/// minimum fidelity score.
/// independent: 1 - (1 - 1/(e1^2 f))^n, clamped to [0,1];
/// dependent:   min(1, n/(e1^2 f)).
double delta_bound(double min_fs, double epsilon1, int n, bool independent);

/// The tighter dependent-case union bound using every player's own FS:
/// min(1, sum_i 1/(e1^2 f_i)).
double delta_bound_per_player(const std::vector<double>& fs, double epsilon1);

/// Minimum total budget to reach (epsilon1, epsilon1*xi, delta) fairness
/// when the best invariability is max_r.
double budget_bound(int n, double epsilon1, double delta, bool independent, double max_r);

struct A1Result {
    std::vector<int> violations; // players with a (near-)zero true SV but a large estimate
    std::optional<double> eps_abs; // sum |err| over standardised small-SV players
};

/// Nullity check: a player whose exact SV is zero (|phi| <= 1e-12) must have
/// |phi_hat| <= epsilon2 = epsilon1*xi. eps_abs follows the experimental
/// convention: standardise both vectors to sum 1 and total the error over
/// players with standardised |phi| <= 0.01; it is absent when either vector
/// sums to <= 0 (the standardisation would be ill-defined).
A1Result check_a1(const std::vector<double>& phi_ref, const std::vector<double>& phi_hat,
                  double epsilon1, double xi);

struct PairDeviation {
    int i = 0;
    int j = 0;
    double deviation = 0.0; // |phi_hat_i - phi_hat_j|
    double threshold = 0.0; // e1(|phi_i|+|phi_j|) + 2 e2
    double ratio = 0.0;     // max of the two quotients; +inf when flagged
    bool ratio_flagged = false; // signs differ or an estimate is zero
};

struct A2Result {
    double violation_rate = 0.0;
    double deviation_ratio_logsum = 0.0; // log sum of finite ratios
    int flagged_ratios = 0;              // pairs excluded from the sum
    std::vector<PairDeviation> pairs;
};

/// Symmetry check over the supplied symmetric pairs.
A2Result check_a2(const std::vector<double>& phi_ref, const std::vector<double>& phi_hat,
                  double epsilon1, double xi,
                  const std::vector<std::pair<int, int>>& symmetric_pairs);

/// Desirability check over ordered pairs (i, j) with i strictly more
/// desirable: violated when phi_hat_i - phi_hat_j <= -(threshold).
double check_a3(const std::vector<double>& phi_ref, const std::vector<double>& phi_hat,
                double epsilon1, double xi,
                const std::vector<std::pair<int, int>>& desirable_pairs);

struct RankMetrics {
    long n_inv = 0;      // ordered-pair inversions (each unordered pair twice)
    double eps_inv = 0.0;
    std::optional<double> mape; // absent when every reference SV is zero
    double mse = 0.0;
};

RankMetrics rank_metrics(const std::vector<double>& phi_ref,
                         const std::vector<double>& phi_hat);

/// Negative log Nash social welfare of fidelity scores standardised to sum n.
/// 0 for an equal vector; larger means a less equitable split. Inputs must be
/// finite and positive (exclude sentinels first).
double nl_nsw(const std::vector<double>& fs);

struct ChebyshevCell {
    int player = 0;
    double epsilon1 = 0.0;
    double empirical = 0.0; // violation frequency across trials
    double bound = 0.0;     // 1/(e1^2 f_i) from the exact variance
    bool vacuous = false;   // bound >= 1 constrains nothing
    bool within_bound = true;
};

enum class ChebyshevProposal { uniform, oracle };

/// Empirical check of the concentration bound behind the fairness guarantee:
/// run m_per_player one-player samples per trial under the given proposal and
/// compare the violation frequency of |phi_hat - phi| > e1|phi| + e2 against
/// 1/(e1^2 f_i), f_i computed from the exact proposal-adjusted variance.
/// within_bound allows 3 binomial standard errors of slack.
std::vector<ChebyshevCell> chebyshev_check(const CooperativeGame& game,
                                           ChebyshevProposal proposal, long m_per_player,
                                           const std::vector<double>& epsilon1_list,
                                           int trials, double xi, std::uint64_t seed);

} // namespace shapfair
