#include "shapfair/verify.hpp"

#include <algorithm>
#include <cmath>

#include "shapfair/estimators.hpp"
#include "shapfair/exact.hpp"
#include "shapfair/experiment.hpp"
#include "shapfair/fairness.hpp"
#include "shapfair/proposal.hpp"
#include "shapfair/sampler.hpp"

namespace shapfair {

namespace {

CooperativeGame random_table_game(int n, std::uint64_t seed) {
    RngStream rng(seed, 0);
    GameTable t;
    t.n = n;
    t.values.resize(std::size_t{1} << n);
    for (auto& v : t.values) v = 2.0 * rng.next_unit() - 1.0;
    return game_from_table(std::move(t));
}

std::string check_line(bool ok, const std::string& text) {
    return std::string(ok ? "[ok]   " : "[FAIL] ") + text;
}

} // namespace

CooperativeGame heterogeneous_benchmark_game() {
    // Block A = players 0..3: 2 * 1[at least 3 of the block present].
    // Block B = players 4..7: |present| + 0.4 * 1[at least 3 present].
    return CooperativeGame(8, [](Coalition c) {
        const int a = std::popcount(c.mask & 0x0FULL);
        const int b = std::popcount(c.mask & 0xF0ULL);
        double v = 0.0;
        if (a >= 3) v += 2.0;
        v += static_cast<double>(b);
        if (b >= 3) v += 0.4;
        return v;
    });
}

VerifyResult verify_oracle() {
    VerifyResult result;
    result.suite = "oracle";
    double worst = 0.0;
    for (std::uint64_t k = 0; k < 100; ++k) {
        const int n = 3 + static_cast<int>(k % 6);
        auto game = random_table_game(n, 0xFACE0000 + k);
        const auto by_perm = exact_shapley_permutations(game);
        const auto by_subset = exact_shapley_subsets(game);
        for (int i = 0; i < n; ++i) {
            const double scale = std::max({1.0, std::abs(by_perm[i]), std::abs(by_subset[i])});
            worst = std::max(worst, std::abs(by_perm[i] - by_subset[i]) / scale);
        }
    }
    result.pass = worst <= 1e-12;
    result.lines.push_back(check_line(result.pass,
                                      "permutation vs subset, 100 games n=3..8: max rel diff " +
                                          format_double(worst) + " (tol 1e-12)"));
    return result;
}

VerifyResult verify_unbiased() {
    VerifyResult result;
    result.suite = "unbiased";
    auto game = make_glove({0, 1}, {2});
    const std::vector<double> phi{1.0 / 6, 1.0 / 6, 2.0 / 3};
    const int seeds = 1000;

    struct Variant {
        std::string name;
        std::string kind;
        double alpha;
    };
    const std::vector<Variant> variants{{"mc", "mc", 0.0},
                                        {"greedy", "greedy", 0.0},
                                        {"gae_alpha0", "gae", 0.0},
                                        {"gae_alpha2", "gae", 2.0},
                                        {"gae_alpha100", "gae", 100.0}};
    for (const auto& variant : variants) {
        GaeConfig config;
        config.m_bootstrap = 5;
        config.m_budget = 60;
        config.alpha = variant.alpha;
        config.seed = 20240601;
        std::vector<double> sum(3, 0.0), sum_sq(3, 0.0);
        for (int trial = 0; trial < seeds; ++trial) {
            EstimationResult r;
            if (variant.kind == "mc")
                r = estimate_mc(game, config, trial);
            else if (variant.kind == "greedy")
                r = estimate_greedy(game, config, trial);
            else
                r = estimate_gae(game, config, trial);
            for (int i = 0; i < 3; ++i) {
                sum[i] += r.phi_hat[i];
                sum_sq[i] += r.phi_hat[i] * r.phi_hat[i];
            }
        }
        for (int i = 0; i < 3; ++i) {
            const double mean = sum[i] / seeds;
            const double var = (sum_sq[i] - seeds * mean * mean) / (seeds - 1);
            const double se = std::sqrt(var / seeds);
            const double gap = std::abs(mean - phi[i]);
            const bool ok = gap <= 4.0 * se;
            result.pass = result.pass && ok;
            result.lines.push_back(check_line(
                ok, variant.name + " player " + std::to_string(i) + ": |mean-phi| = " +
                        format_double(gap) + " vs 4 se = " + format_double(4.0 * se)));
        }
    }
    return result;
}

VerifyResult verify_prop3() {
    VerifyResult result;
    result.suite = "prop3";
    auto game = heterogeneous_benchmark_game();

    // Precondition of the fixture: marginal variances spread by >= 10x.
    const auto profile = exact_moments(game);
    const auto [lo, hi] = std::minmax_element(profile.variance_uniform.begin(),
                                              profile.variance_uniform.end());
    const double spread = *hi / *lo;
    result.lines.push_back(check_line(spread >= 10.0,
                                      "per-player variance spread " + format_double(spread) +
                                          " (needs >= 10)"));
    result.pass = result.pass && spread >= 10.0;

    GaeConfig config;
    config.m_bootstrap = 20;
    config.m_budget = 2000;
    config.alpha = 2.0;
    config.seed = 7777;
    const int seeds = 30;
    double mc = 0.0, greedy = 0.0, gae = 0.0;
    for (int trial = 0; trial < seeds; ++trial) {
        auto min_fs = [](const EstimationResult& r) {
            return *std::min_element(r.fs_per_player.begin(), r.fs_per_player.end());
        };
        mc += min_fs(estimate_mc(game, config, trial));
        greedy += min_fs(estimate_greedy(game, config, trial));
        gae += min_fs(estimate_gae(game, config, trial));
    }
    mc /= seeds;
    greedy /= seeds;
    gae /= seeds;
    const bool order = gae >= greedy && greedy >= mc;
    const bool ratio = gae / mc > 1.5;
    result.pass = result.pass && order && ratio;
    result.lines.push_back(check_line(order, "mean min-FS over 30 seeds: GAE " +
                                                 format_double(gae) + " >= greedy " +
                                                 format_double(greedy) + " >= MC " +
                                                 format_double(mc)));
    result.lines.push_back(
        check_line(ratio, "GAE/MC ratio " + format_double(gae / mc) + " (needs > 1.5)"));
    return result;
}

VerifyResult verify_chebyshev() {
    VerifyResult result;
    result.suite = "chebyshev";
    auto game = make_glove({0, 1}, {2});
    const auto cells = chebyshev_check(game, ChebyshevProposal::uniform, 50,
                                       {0.5, 1.0, 2.0}, 2000, 1e-3, 424242);
    for (const auto& cell : cells) {
        result.pass = result.pass && cell.within_bound;
        result.lines.push_back(check_line(
            cell.within_bound,
            "player " + std::to_string(cell.player) + " eps1 " +
                format_double(cell.epsilon1) + ": empirical " +
                format_double(cell.empirical) + " <= bound " + format_double(cell.bound) +
                (cell.vacuous ? " (vacuous)" : "")));
    }
    return result;
}

VerifyResult verify_proposal() {
    VerifyResult result;
    result.suite = "proposal";
    int strict_required = 0, strict_held = 0;
    double worst_excess = 0.0;
    for (std::uint64_t k = 0; k < 50; ++k) {
        const int n = 3 + static_cast<int>(k % 4);
        auto game = random_table_game(n, 0xBEEF00 + k);
        const auto profile = exact_moments(game);
        for (int i = 0; i < n; ++i) {
            const double best = proposal_variance(oracle_theta(profile, i), profile, i);
            const double plain = proposal_variance(uniform_theta(n), profile, i);
            worst_excess = std::max(worst_excess, best - plain);
            const auto& ms = profile.mean_sq_by_cardinality[i];
            const auto [mn, mx] = std::minmax_element(ms.begin(), ms.end());
            if (*mx > 1.1 * *mn) {
                ++strict_required;
                if (best < plain) ++strict_held;
            }
        }
    }
    const bool never_worse = worst_excess <= 1e-9;
    const bool strict = strict_required == strict_held;
    result.pass = never_worse && strict;
    result.lines.push_back(check_line(never_worse,
                                      "oracle proposal never above uniform: max excess " +
                                          format_double(worst_excess) + " (tol 1e-9)"));
    result.lines.push_back(check_line(
        strict, "strict improvement where moments differ >10%: " +
                    std::to_string(strict_held) + "/" + std::to_string(strict_required)));
    return result;
}

VerifyResult run_verify_suite(const std::string& name) {
    if (name == "oracle") return verify_oracle();
    if (name == "unbiased") return verify_unbiased();
    if (name == "prop3") return verify_prop3();
    if (name == "chebyshev") return verify_chebyshev();
    if (name == "proposal") return verify_proposal();
    throw config_error({"unknown verify suite \"" + name +
                        "\" (expected oracle, unbiased, prop3, chebyshev or proposal)"});
}

} // namespace shapfair
