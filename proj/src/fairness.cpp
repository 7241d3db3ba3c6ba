#include "shapfair/fairness.hpp"

#include <algorithm>
#include <cmath>

#include "shapfair/sampler.hpp"

namespace shapfair {

namespace {
constexpr double kNullTol = 1e-12;

void require_same_length(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size())
        throw invalid_argument_error("reference and estimate vectors differ in length");
}
} // namespace

FidelityReport fidelity_report(const EstimationResult& result, double xi) {
    FidelityReport report;
    report.xi = xi;
    report.fs = result.fs_per_player;
    report.invariability.resize(result.fs_per_player.size());
    for (std::size_t i = 0; i < report.fs.size(); ++i)
        report.invariability[i] = report.fs[i] / static_cast<double>(result.m_per_player[i]);
    report.min_fs = *std::min_element(report.fs.begin(), report.fs.end());
    return report;
}

double delta_bound(double min_fs, double epsilon1, int n, bool independent) {
    if (!(min_fs > 0.0)) throw invalid_argument_error("delta_bound needs min_fs > 0");
    if (!(epsilon1 > 0.0)) throw invalid_argument_error("delta_bound needs epsilon1 > 0");
    if (n < 1) throw invalid_argument_error("delta_bound needs n >= 1");
    const double f = epsilon1 * epsilon1 * min_fs; // may be inf; 1/inf = 0
    if (independent) {
        if (f <= 1.0) return 1.0;
        return std::clamp(1.0 - std::pow(1.0 - 1.0 / f, n), 0.0, 1.0);
    }
    return std::min(1.0, static_cast<double>(n) / f);
}

double delta_bound_per_player(const std::vector<double>& fs, double epsilon1) {
    if (!(epsilon1 > 0.0)) throw invalid_argument_error("epsilon1 must be > 0");
    double total = 0.0;
    for (double f : fs) {
        if (!(f > 0.0)) throw invalid_argument_error("fidelity scores must be > 0");
        total += 1.0 / (epsilon1 * epsilon1 * f);
    }
    return std::min(1.0, total);
}

double budget_bound(int n, double epsilon1, double delta, bool independent, double max_r) {
    if (!(delta > 0.0 && delta < 1.0))
        throw invalid_argument_error("budget_bound needs delta in (0,1)");
    if (!(epsilon1 > 0.0)) throw invalid_argument_error("budget_bound needs epsilon1 > 0");
    if (!(max_r > 0.0)) throw invalid_argument_error("budget_bound needs max_r > 0");
    const double e2 = epsilon1 * epsilon1;
    if (independent)
        return n / (max_r * e2 * (1.0 - std::pow(1.0 - delta, 1.0 / n)));
    return static_cast<double>(n) * n / (max_r * e2 * delta);
}

A1Result check_a1(const std::vector<double>& phi_ref, const std::vector<double>& phi_hat,
                  double epsilon1, double xi) {
    require_same_length(phi_ref, phi_hat);
    const double epsilon2 = epsilon1 * xi;
    A1Result result;
    for (std::size_t i = 0; i < phi_ref.size(); ++i)
        if (std::abs(phi_ref[i]) <= kNullTol && std::abs(phi_hat[i]) > epsilon2)
            result.violations.push_back(static_cast<int>(i));

    double ref_sum = 0.0, hat_sum = 0.0;
    for (std::size_t i = 0; i < phi_ref.size(); ++i) {
        ref_sum += phi_ref[i];
        hat_sum += phi_hat[i];
    }
    if (ref_sum > 0.0 && hat_sum > 0.0) {
        double eps_abs = 0.0;
        for (std::size_t i = 0; i < phi_ref.size(); ++i) {
            const double ref_std = phi_ref[i] / ref_sum;
            const double hat_std = phi_hat[i] / hat_sum;
            if (std::abs(ref_std) <= 0.01) eps_abs += std::abs(hat_std - ref_std);
        }
        result.eps_abs = eps_abs;
    }
    return result;
}

A2Result check_a2(const std::vector<double>& phi_ref, const std::vector<double>& phi_hat,
                  double epsilon1, double xi,
                  const std::vector<std::pair<int, int>>& symmetric_pairs) {
    require_same_length(phi_ref, phi_hat);
    if (symmetric_pairs.empty())
        throw invalid_argument_error("check_a2 needs at least one symmetric pair");
    const double epsilon2 = epsilon1 * xi;
    A2Result result;
    long violations = 0;
    double ratio_sum = 0.0;
    for (auto [i, j] : symmetric_pairs) {
        PairDeviation pd;
        pd.i = i;
        pd.j = j;
        pd.deviation = std::abs(phi_hat[i] - phi_hat[j]);
        pd.threshold =
            epsilon1 * (std::abs(phi_ref[i]) + std::abs(phi_ref[j])) + 2.0 * epsilon2;
        if (pd.deviation > pd.threshold) ++violations;
        if (phi_hat[i] == 0.0 || phi_hat[j] == 0.0 ||
            std::signbit(phi_hat[i]) != std::signbit(phi_hat[j])) {
            pd.ratio = kInfiniteFs;
            pd.ratio_flagged = true;
            ++result.flagged_ratios;
        } else {
            pd.ratio = std::max(phi_hat[i] / phi_hat[j], phi_hat[j] / phi_hat[i]);
            ratio_sum += pd.ratio;
        }
        result.pairs.push_back(pd);
    }
    result.violation_rate =
        static_cast<double>(violations) / static_cast<double>(symmetric_pairs.size());
    result.deviation_ratio_logsum = ratio_sum > 0.0 ? std::log(ratio_sum) : -kInfiniteFs;
    return result;
}

double check_a3(const std::vector<double>& phi_ref, const std::vector<double>& phi_hat,
                double epsilon1, double xi,
                const std::vector<std::pair<int, int>>& desirable_pairs) {
    require_same_length(phi_ref, phi_hat);
    if (desirable_pairs.empty())
        throw invalid_argument_error("check_a3 needs at least one desirable pair");
    const double epsilon2 = epsilon1 * xi;
    long violations = 0;
    for (auto [i, j] : desirable_pairs) {
        const double threshold =
            epsilon1 * (std::abs(phi_ref[i]) + std::abs(phi_ref[j])) + 2.0 * epsilon2;
        if (!(phi_hat[i] - phi_hat[j] > -threshold)) ++violations;
    }
    return static_cast<double>(violations) / static_cast<double>(desirable_pairs.size());
}

RankMetrics rank_metrics(const std::vector<double>& phi_ref,
                         const std::vector<double>& phi_hat) {
    require_same_length(phi_ref, phi_hat);
    if (phi_ref.size() < 2)
        throw invalid_argument_error("rank metrics need at least two players");
    RankMetrics metrics;
    const int n = static_cast<int>(phi_ref.size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            if ((phi_ref[i] > phi_ref[j] && phi_hat[i] < phi_hat[j]) ||
                (phi_ref[i] < phi_ref[j] && phi_hat[i] > phi_hat[j]))
                ++metrics.n_inv;
            metrics.eps_inv +=
                std::abs(phi_ref[i] - phi_ref[j] - (phi_hat[i] - phi_hat[j]));
        }
    double ape_sum = 0.0;
    int nonzero = 0;
    double mse = 0.0;
    for (int i = 0; i < n; ++i) {
        const double err = phi_hat[i] - phi_ref[i];
        mse += err * err;
        if (phi_ref[i] != 0.0) {
            ape_sum += std::abs(err / phi_ref[i]);
            ++nonzero;
        }
    }
    metrics.mse = mse / n;
    if (nonzero > 0) metrics.mape = ape_sum / nonzero;
    return metrics;
}

double nl_nsw(const std::vector<double>& fs) {
    if (fs.empty()) throw invalid_argument_error("nl_nsw needs at least one score");
    double sum = 0.0;
    for (double f : fs) {
        if (!(f > 0.0) || !std::isfinite(f))
            throw invalid_argument_error("nl_nsw needs finite positive fidelity scores");
        sum += f;
    }
    const double n = static_cast<double>(fs.size());
    double acc = 0.0;
    for (double f : fs) acc += std::log(f * n / sum);
    return -acc;
}

std::vector<ChebyshevCell> chebyshev_check(const CooperativeGame& game,
                                           ChebyshevProposal proposal, long m_per_player,
                                           const std::vector<double>& epsilon1_list,
                                           int trials, double xi, std::uint64_t seed) {
    const int n = game.player_count();
    if (m_per_player < 1) throw invalid_argument_error("m_per_player must be >= 1");
    if (trials < 1) throw invalid_argument_error("trials must be >= 1");
    const ExactProfile exact = exact_moments(game);

    std::vector<std::vector<double>> theta(n);
    for (int i = 0; i < n; ++i)
        theta[i] = proposal == ChebyshevProposal::uniform ? uniform_theta(n)
                                                          : oracle_theta(exact, i);

    // Violation counts per (player, epsilon1).
    std::vector<std::vector<long>> violations(n,
                                              std::vector<long>(epsilon1_list.size(), 0));
    for (int trial = 0; trial < trials; ++trial) {
        for (int i = 0; i < n; ++i) {
            RngStream stream = player_stream(seed, static_cast<std::uint64_t>(trial), i);
            double mean = 0.0;
            for (long t = 1; t <= m_per_player; ++t) {
                const auto placement = sample_placement(stream, i, n, theta[i]);
                const double sigma = game.marginal_contribution(i, placement.predecessors);
                const double weighted =
                    sigma * importance_weight(theta[i], placement.cardinality, n);
                mean += (weighted - mean) / static_cast<double>(t);
            }
            const double err = std::abs(mean - exact.phi[i]);
            for (std::size_t e = 0; e < epsilon1_list.size(); ++e) {
                const double eps1 = epsilon1_list[e];
                if (err > eps1 * std::abs(exact.phi[i]) + eps1 * xi) ++violations[i][e];
            }
        }
    }

    std::vector<ChebyshevCell> cells;
    for (int i = 0; i < n; ++i) {
        const double variance = proposal_variance(theta[i], exact, i);
        for (std::size_t e = 0; e < epsilon1_list.size(); ++e) {
            ChebyshevCell cell;
            cell.player = i;
            cell.epsilon1 = epsilon1_list[e];
            cell.empirical =
                static_cast<double>(violations[i][e]) / static_cast<double>(trials);
            const double f_i = variance <= 0.0
                                   ? kInfiniteFs
                                   : static_cast<double>(m_per_player) *
                                         (std::abs(exact.phi[i]) + xi) *
                                         (std::abs(exact.phi[i]) + xi) / variance;
            cell.bound = 1.0 / (cell.epsilon1 * cell.epsilon1 * f_i);
            cell.vacuous = cell.bound >= 1.0;
            const double capped = std::min(cell.bound, 1.0);
            const double stderr3 =
                3.0 * std::sqrt(capped * (1.0 - capped) / static_cast<double>(trials));
            cell.within_bound = cell.vacuous || cell.empirical <= cell.bound + stderr3;
            cells.push_back(cell);
        }
    }
    return cells;
}

} // namespace shapfair
