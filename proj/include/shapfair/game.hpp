#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "shapfair/coalition.hpp"
#include "shapfair/errors.hpp"

namespace shapfair {

/// A cooperative game: n players and a total characteristic function
/// v : coalitions -> utility, v(empty) included. Evaluations are memoised;
/// the eval counter reports how many distinct coalitions have been priced.
///
/// Games must be deterministic. Concurrent evaluate() calls are safe; the
/// cache tolerates two threads racing to insert the same value.
class CooperativeGame {
  public:
    CooperativeGame(int n, std::function<double(Coalition)> value_fn);

    CooperativeGame(CooperativeGame&& other) noexcept
        : n_(other.n_), fn_(std::move(other.fn_)),
          eval_count_(other.eval_count_.load()), dense_(other.dense_),
          dense_values_(std::move(other.dense_values_)),
          dense_seen_(std::move(other.dense_seen_)),
          map_cache_(std::move(other.map_cache_)) {}
    CooperativeGame(const CooperativeGame&) = delete;
    CooperativeGame& operator=(const CooperativeGame&) = delete;
    CooperativeGame& operator=(CooperativeGame&&) = delete;

    int player_count() const { return n_; }

    /// v(c). Throws invalid_argument_error if c has members outside 0..n-1.
    double evaluate(Coalition c) const;

    /// v(predecessors + i) - v(predecessors). i must not already be present.
    double marginal_contribution(int i, Coalition predecessors) const;

    /// Number of distinct coalitions evaluated so far (cache misses).
    long evals() const { return eval_count_.load(std::memory_order_relaxed); }

  private:
    int n_;
    std::function<double(Coalition)> fn_;
    mutable std::atomic<long> eval_count_{0};

    // Dense cache for n <= kDenseBits, hash map beyond. The dense path keeps
    // the exact-oracle loops (2^n coalitions, visited many times) cheap.
    // Values are published before their seen bit (release on the bit write,
    // acquire on the bit read), so concurrent readers never see a torn slot.
    static constexpr int kDenseBits = 20;
    bool dense_ = false;
    mutable std::vector<std::atomic<double>> dense_values_;
    mutable std::vector<std::atomic<std::uint64_t>> dense_seen_;
    mutable std::mutex map_mutex_;
    mutable std::unordered_map<std::uint64_t, double> map_cache_;
};

/// Dense serialisable form of a game: values[mask] = v(mask).
struct GameTable {
    int n = 0;
    std::vector<double> values; // length exactly 2^n, all finite
};

/// Table games are capped at n <= 20 to keep files under 8 MiB.
constexpr int kMaxTablePlayers = 20;

// --- Built-in synthetic families (documented closed-form or brute-forceable SVs) ---

/// v(S) = sum of weights of members. phi = weights.
CooperativeGame make_additive(std::vector<double> weights);

/// v(S) = 1 iff |S| >= floor(n/2)+1. phi_i = 1/n.
CooperativeGame make_majority(int n);

/// v(S) = min(|S & left|, |S & right|); left/right must partition 0..n-1.
CooperativeGame make_glove(std::vector<int> left, std::vector<int> right);

/// v(S) = max weight of members, v(empty) = 0. Weights must be >= 0.
CooperativeGame make_airport(std::vector<double> weights);

/// 2n-player game in which player n+i is a functional clone of player i:
/// v(C) = v_base(collapse(C)) where collapse folds each clone onto its
/// original and copies count once.
CooperativeGame make_duplicated(CooperativeGame base);

/// Collapse a coalition of a duplicated game onto the base player set.
Coalition collapse_clones(Coalition c, int base_n);

// --- Game Table Format (shapfair-game-v1) ---

GameTable table_from_game(const CooperativeGame& game);
CooperativeGame game_from_table(GameTable table);

void save_table(const CooperativeGame& game, const std::string& path);
CooperativeGame load_table(const std::string& path);

/// Launch `command` through the shell and evaluate coalitions over the
/// Utility Line Protocol: one "EVAL <bitmask>" line per query, child answers
/// "VALUE <float>", "QUIT" terminates. Results are memoised; queries
/// serialise through the single child, so treat the game as exclusive-access.
/// Throws external_utility_error on child death, malformed replies, or a
/// per-query timeout (default 60 s).
CooperativeGame make_subprocess_game(const std::string& command, int n,
                                     double timeout_seconds = 60.0);

} // namespace shapfair
