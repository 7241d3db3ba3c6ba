#include "shapfair/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "shapfair/sampler.hpp"

namespace shapfair {

void RunningEstimate::update(double weighted_sample) {
    if (!std::isfinite(weighted_sample))
        throw numeric_error("non-finite weighted sample", player, m + 1);
    m += 1;
    const double delta = weighted_sample - mean;
    mean += delta / static_cast<double>(m);
    m2 += delta * (weighted_sample - mean);
}

double RunningEstimate::variance() const {
    if (m < 2) throw insufficient_data_error("sample variance needs at least 2 samples");
    return std::max(0.0, m2 / static_cast<double>(m - 1));
}

double invariability(double mean, double sample_variance, double xi, FsFormula formula) {
    const double signal = formula == FsFormula::def2 ? std::abs(mean) + xi : mean + xi;
    if (sample_variance <= 0.0) return kInfiniteFs;
    return signal * signal / sample_variance;
}

double fidelity_score(const RunningEstimate& est, double xi, FsFormula formula) {
    const double r = invariability(est.mean, est.variance(), xi, formula);
    return static_cast<double>(est.m) * r;
}

double delta_p(double r_hat, long m_i, double epsilon1) {
    if (std::isinf(r_hat)) return 1.0;
    const double e2r = epsilon1 * epsilon1 * r_hat;
    const double numerator = e2r - 1.0 / static_cast<double>(m_i + 1);
    const double denominator = e2r - 1.0 / static_cast<double>(m_i);
    if (std::abs(denominator) < 1e-12)
        throw degenerate_bound_error("fairness-improvement ratio undefined: eps1^2 r m = 1");
    return numerator / denominator;
}

void GaeConfig::validate() const {
    if (m_bootstrap < 2)
        throw invalid_argument_error("m_bootstrap must be >= 2 (variance needs two samples)");
    if (m_budget < 0) throw invalid_argument_error("m_budget must be >= 0");
    if (!(xi > 0.0)) throw invalid_argument_error("xi must be > 0");
    if (!(alpha >= 0.0)) throw invalid_argument_error("alpha must be >= 0");
    if (selection == Selection::delta_p && !(epsilon1 > 0.0))
        throw invalid_argument_error("delta_p selection requires epsilon1 > 0");
    if (refit_every < 0) throw invalid_argument_error("refit_every must be >= 0");
}

RngStream player_stream(std::uint64_t seed, std::uint64_t trial, int player) {
    return RngStream(seed, trial * 0x100000000ULL + static_cast<std::uint64_t>(player));
}

namespace {

// Stream id reserved for the shared-bootstrap permutation draws.
constexpr int kSharedStreamPlayer = 0xFFFFFF;

struct LoopState {
    std::vector<RunningEstimate> estimates;
    StratumStats stats;
    std::vector<double> fs;
    std::vector<RngStream> streams;
};

// Selection score. Zero observed variance reports as the +inf FS sentinel,
// but treating such a player as permanently settled freezes it at whatever
// the degenerate bootstrap produced (an all-equal run leaves phi_hat stuck
// there), which visibly biases the estimates. For selection only, price a
// zero-variance history at an SNR-1 prior: the score is the bare sample
// count m_i, so the player is probed again once every noisy player's score
// exceeds it, and a fully degenerate board reduces to round-robin by count.
double selection_score(const RunningEstimate& est, double fs) {
    if (fs != kInfiniteFs) return fs;
    return static_cast<double>(est.m);
}

int select_player(const LoopState& state, const GaeConfig& config) {
    const int n = static_cast<int>(state.estimates.size());
    if (config.selection == Selection::delta_p) {
        int best = -1;
        double best_gain = -kInfiniteFs;
        bool degenerate = false;
        for (int i = 0; i < n; ++i) {
            const double r_hat = selection_score(state.estimates[i], state.fs[i]) /
                                 static_cast<double>(state.estimates[i].m);
            double gain;
            try {
                gain = delta_p(r_hat, state.estimates[i].m, config.epsilon1);
            } catch (const degenerate_bound_error&) {
                degenerate = true;
                break;
            }
            if (gain > best_gain) {
                best_gain = gain;
                best = i;
            }
        }
        if (!degenerate) return best;
        // fall through to min-FS selection for this step
    }
    int best = 0;
    double best_score = selection_score(state.estimates[0], state.fs[0]);
    for (int i = 1; i < n; ++i) {
        const double score = selection_score(state.estimates[i], state.fs[i]);
        if (score < best_score) {
            best_score = score;
            best = i;
        }
    }
    return best;
}

LoopState init_state(const CooperativeGame& game, const GaeConfig& config,
                     std::uint64_t trial) {
    const int n = game.player_count();
    LoopState state{{}, StratumStats(n, n), {}, {}};
    state.streams.reserve(n);
    for (int i = 0; i < n; ++i)
        state.streams.push_back(player_stream(config.seed, trial, i));

    state.estimates.resize(n);
    for (int i = 0; i < n; ++i) state.estimates[i].player = i;

    if (config.shared_bootstrap) {
        RngStream shared = player_stream(config.seed, trial, kSharedStreamPlayer);
        for (long t = 0; t < config.m_bootstrap; ++t) {
            const auto order = sample_uniform_permutation(shared, n);
            Coalition predecessors;
            for (int position = 0; position < n; ++position) {
                const int i = order[position];
                const double sigma = game.marginal_contribution(i, predecessors);
                state.estimates[i].update(sigma);
                state.stats.accumulate(i, position, sigma);
                predecessors = predecessors.with(i);
            }
        }
    } else {
        const auto uniform = uniform_theta(n);
        for (int i = 0; i < n; ++i) {
            for (long t = 0; t < config.m_bootstrap; ++t) {
                const auto placement = sample_placement(state.streams[i], i, n, uniform);
                const double sigma = game.marginal_contribution(i, placement.predecessors);
                state.estimates[i].update(sigma);
                state.stats.accumulate(i, placement.cardinality, sigma);
            }
        }
    }
    for (int i = 0; i < n; ++i) state.estimates[i].includes_bootstrap = true;

    state.fs.resize(n);
    for (int i = 0; i < n; ++i)
        state.fs[i] = fidelity_score(state.estimates[i], config.xi, config.fs_formula);
    return state;
}

ProposalParams fit_proposal(const LoopState& state, const GaeConfig& config, int n) {
    ProposalParams proposal;
    proposal.alpha = config.alpha;
    proposal.source = config.alpha > 0.0 ? ProposalSource::map : ProposalSource::mle;
    proposal.theta.resize(n);
    if (config.shared_proposal) {
        // Pool every player's strata, then hand mle_theta one synthetic
        // sample per stratum carrying the pooled root-mean-square.
        std::vector<long> count(n, 0);
        std::vector<double> sum_sq(n, 0.0);
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < n; ++c) {
                count[c] += state.stats.count(i, c);
                sum_sq[c] += state.stats.sum_sq(i, c);
            }
        StratumStats pooled(1, n);
        for (int c = 0; c < n; ++c)
            if (count[c] > 0)
                pooled.accumulate(0, c, std::sqrt(sum_sq[c] / static_cast<double>(count[c])));
        const auto shared = map_theta(mle_theta(pooled, 0, n), config.alpha, n);
        for (int i = 0; i < n; ++i) proposal.theta[i] = shared;
    } else {
        for (int i = 0; i < n; ++i)
            proposal.theta[i] =
                map_theta(mle_theta(state.stats, i, n), config.alpha, n);
    }
    return proposal;
}

EstimationResult finish(LoopState& state, ProposalParams proposal,
                        std::vector<TraceRecord> trace) {
    EstimationResult result;
    const int n = static_cast<int>(state.estimates.size());
    result.phi_hat.resize(n);
    result.m_per_player.resize(n);
    result.fs_per_player = state.fs;
    for (int i = 0; i < n; ++i) {
        result.phi_hat[i] = state.estimates[i].mean;
        result.m_per_player[i] = state.estimates[i].m;
    }
    result.proposal = std::move(proposal);
    result.trace = std::move(trace);
    return result;
}

ProposalParams uniform_proposal(int n) {
    ProposalParams p;
    p.source = ProposalSource::uniform;
    p.theta.assign(n, uniform_theta(n));
    return p;
}

// The shared main loop: greedy (or delta_p) selection, placement sampling
// from the proposal, weighted Welford update, FS refresh for the player hit.
EstimationResult run_active_loop(const CooperativeGame& game, const GaeConfig& config,
                                 ProposalParams proposal, LoopState state, bool weighted) {
    const int n = game.player_count();
    std::vector<TraceRecord> trace;
    if (config.record_trace) trace.reserve(config.m_budget);

    for (long step = 1; step <= config.m_budget; ++step) {
        const int j = select_player(state, config);
        const auto placement = sample_placement(state.streams[j], j, n, proposal.theta[j]);
        const double sigma = game.marginal_contribution(j, placement.predecessors);
        const double weight =
            weighted ? importance_weight(proposal.theta[j], placement.cardinality, n) : 1.0;
        state.estimates[j].update(weight * sigma);
        state.stats.accumulate(j, placement.cardinality, sigma);
        state.fs[j] = fidelity_score(state.estimates[j], config.xi, config.fs_formula);
        if (config.refit_every > 0 &&
            (state.estimates[j].m - config.m_bootstrap) % config.refit_every == 0) {
            proposal.theta[j] =
                map_theta(mle_theta(state.stats, j, n), config.alpha, n);
        }
        if (config.record_trace)
            trace.push_back({step, j, placement.cardinality, placement.predecessors.mask,
                             sigma, weight, state.fs[j]});
    }
    return finish(state, std::move(proposal), std::move(trace));
}

} // namespace

BootstrapResult bootstrap(const CooperativeGame& game, const GaeConfig& config,
                          std::uint64_t trial) {
    config.validate();
    LoopState state = init_state(game, config, trial);
    return {std::move(state.estimates), std::move(state.stats)};
}

EstimationResult estimate_mc(const CooperativeGame& game, const GaeConfig& config,
                             std::uint64_t trial) {
    config.validate();
    const int n = game.player_count();
    LoopState state = init_state(game, config, trial);
    ProposalParams proposal = uniform_proposal(n);
    std::vector<TraceRecord> trace;
    if (config.record_trace) trace.reserve(config.m_budget);
    long step = 0;
    for (int i = 0; i < n; ++i) {
        const long quota = config.m_budget / n + (i < config.m_budget % n ? 1 : 0);
        for (long t = 0; t < quota; ++t) {
            const auto placement = sample_placement(state.streams[i], i, n, proposal.theta[i]);
            const double sigma = game.marginal_contribution(i, placement.predecessors);
            state.estimates[i].update(sigma);
            state.stats.accumulate(i, placement.cardinality, sigma);
            state.fs[i] = fidelity_score(state.estimates[i], config.xi, config.fs_formula);
            ++step;
            if (config.record_trace)
                trace.push_back({step, i, placement.cardinality,
                                 placement.predecessors.mask, sigma, 1.0, state.fs[i]});
        }
    }
    return finish(state, std::move(proposal), std::move(trace));
}

EstimationResult estimate_greedy(const CooperativeGame& game, const GaeConfig& config,
                                 std::uint64_t trial) {
    config.validate();
    LoopState state = init_state(game, config, trial);
    ProposalParams proposal = uniform_proposal(game.player_count());
    return run_active_loop(game, config, std::move(proposal), std::move(state),
                           /*weighted=*/false);
}

EstimationResult estimate_gae(const CooperativeGame& game, const GaeConfig& config,
                              std::uint64_t trial) {
    config.validate();
    LoopState state = init_state(game, config, trial);
    ProposalParams proposal = fit_proposal(state, config, game.player_count());
    return run_active_loop(game, config, std::move(proposal), std::move(state),
                           /*weighted=*/true);
}

std::vector<long> greedy_fixed_r_allocation(const std::vector<double>& r, long m) {
    const int n = static_cast<int>(r.size());
    if (n == 0) throw invalid_argument_error("need at least one invariability");
    for (double x : r)
        if (!(x > 0.0)) throw invalid_argument_error("invariabilities must be > 0");
    std::vector<long> m_i(n, 0);
    for (long step = 0; step < m; ++step) {
        int best = 0;
        double best_fs = static_cast<double>(m_i[0]) * r[0];
        for (int i = 1; i < n; ++i) {
            const double fs = static_cast<double>(m_i[i]) * r[i];
            if (fs < best_fs) {
                best_fs = fs;
                best = i;
            }
        }
        m_i[best] += 1;
    }
    return m_i;
}

} // namespace shapfair
