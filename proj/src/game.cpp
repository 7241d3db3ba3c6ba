#include "shapfair/game.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace shapfair {

CooperativeGame::CooperativeGame(int n, std::function<double(Coalition)> value_fn)
    : n_(n), fn_(std::move(value_fn)) {
    if (n < 1 || n > 64)
        throw invalid_argument_error("player count must be in 1..64, got " + std::to_string(n));
    if (!fn_) throw invalid_argument_error("game needs a characteristic function");
    if (n_ <= kDenseBits) {
        dense_ = true;
        const std::size_t size = std::size_t{1} << n_;
        dense_values_ = std::vector<std::atomic<double>>(size);
        dense_seen_ = std::vector<std::atomic<std::uint64_t>>((size + 63) / 64);
    }
}

double CooperativeGame::evaluate(Coalition c) const {
    require_valid(c, n_);
    if (dense_) {
        auto& word = dense_seen_[c.mask >> 6];
        const std::uint64_t bit = std::uint64_t{1} << (c.mask & 63);
        if (word.load(std::memory_order_acquire) & bit)
            return dense_values_[c.mask].load(std::memory_order_relaxed);
        const double v = fn_(c);
        dense_values_[c.mask].store(v, std::memory_order_relaxed);
        if (!(word.fetch_or(bit, std::memory_order_release) & bit))
            eval_count_.fetch_add(1, std::memory_order_relaxed);
        return v;
    }
    {
        std::lock_guard<std::mutex> lock(map_mutex_);
        auto it = map_cache_.find(c.mask);
        if (it != map_cache_.end()) return it->second;
    }
    const double v = fn_(c);
    std::lock_guard<std::mutex> lock(map_mutex_);
    auto [it, inserted] = map_cache_.emplace(c.mask, v);
    if (inserted) eval_count_.fetch_add(1, std::memory_order_relaxed);
    return it->second;
}

double CooperativeGame::marginal_contribution(int i, Coalition predecessors) const {
    if (i < 0 || i >= n_)
        throw invalid_argument_error("player index " + std::to_string(i) + " out of range");
    if (predecessors.contains(i))
        throw invalid_argument_error("player " + std::to_string(i) +
                                     " is already in its predecessor set");
    return evaluate(predecessors.with(i)) - evaluate(predecessors);
}

CooperativeGame make_additive(std::vector<double> weights) {
    const int n = static_cast<int>(weights.size());
    return CooperativeGame(n, [w = std::move(weights)](Coalition c) {
        double total = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i)
            if (c.contains(static_cast<int>(i))) total += w[i];
        return total;
    });
}

CooperativeGame make_majority(int n) {
    const int quota = n / 2 + 1;
    return CooperativeGame(n, [quota](Coalition c) {
        return c.size() >= quota ? 1.0 : 0.0;
    });
}

CooperativeGame make_glove(std::vector<int> left, std::vector<int> right) {
    const int n = static_cast<int>(left.size() + right.size());
    std::uint64_t lmask = 0, rmask = 0;
    for (int p : left) {
        if (p < 0 || p >= n) throw invalid_argument_error("glove: player out of range");
        lmask |= std::uint64_t{1} << p;
    }
    for (int p : right) {
        if (p < 0 || p >= n) throw invalid_argument_error("glove: player out of range");
        rmask |= std::uint64_t{1} << p;
    }
    if ((lmask & rmask) != 0 || std::popcount(lmask | rmask) != n)
        throw invalid_argument_error("glove: left/right must partition the player set");
    return CooperativeGame(n, [lmask, rmask](Coalition c) {
        const int l = std::popcount(c.mask & lmask);
        const int r = std::popcount(c.mask & rmask);
        return static_cast<double>(std::min(l, r));
    });
}

CooperativeGame make_airport(std::vector<double> weights) {
    const int n = static_cast<int>(weights.size());
    for (double w : weights)
        if (!(w >= 0.0)) throw invalid_argument_error("airport: weights must be >= 0");
    return CooperativeGame(n, [w = std::move(weights)](Coalition c) {
        double m = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i)
            if (c.contains(static_cast<int>(i))) m = std::max(m, w[i]);
        return m;
    });
}

Coalition collapse_clones(Coalition c, int base_n) {
    const std::uint64_t low = c.mask & ((std::uint64_t{1} << base_n) - 1);
    return Coalition{low | (c.mask >> base_n)};
}

CooperativeGame make_duplicated(CooperativeGame base) {
    const int base_n = base.player_count();
    if (base_n > 32)
        throw invalid_argument_error("duplicated: base game limited to 32 players");
    auto shared = std::make_shared<CooperativeGame>(std::move(base));
    return CooperativeGame(2 * base_n, [shared, base_n](Coalition c) {
        return shared->evaluate(collapse_clones(c, base_n));
    });
}

GameTable table_from_game(const CooperativeGame& game) {
    const int n = game.player_count();
    if (n > kMaxTablePlayers)
        throw capacity_error("game tables support at most " +
                             std::to_string(kMaxTablePlayers) + " players, got " +
                             std::to_string(n));
    GameTable t;
    t.n = n;
    t.values.resize(std::size_t{1} << n);
    for (std::uint64_t mask = 0; mask < t.values.size(); ++mask)
        t.values[mask] = game.evaluate(Coalition{mask});
    return t;
}

CooperativeGame game_from_table(GameTable table) {
    if (table.n < 1 || table.n > kMaxTablePlayers)
        throw format_error("table player count out of range: " + std::to_string(table.n));
    if (table.values.size() != (std::size_t{1} << table.n))
        throw format_error("table must hold exactly 2^n values");
    for (double v : table.values)
        if (!std::isfinite(v)) throw format_error("table holds a non-finite utility");
    auto shared = std::make_shared<GameTable>(std::move(table));
    return CooperativeGame(shared->n, [shared](Coalition c) {
        return shared->values[c.mask];
    });
}

void save_table(const CooperativeGame& game, const std::string& path) {
    GameTable t = table_from_game(game);
    nlohmann::json values = nlohmann::json::object();
    for (std::uint64_t mask = 0; mask < t.values.size(); ++mask)
        values[std::to_string(mask)] = t.values[mask];
    nlohmann::json doc{{"format", "shapfair-game-v1"}, {"n", t.n}, {"values", values}};
    std::ofstream out(path);
    if (!out) throw format_error("cannot open " + path + " for writing");
    out << doc.dump(2) << '\n';
}

CooperativeGame load_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw format_error("cannot open " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw format_error(path + ": " + e.what());
    }
    if (!doc.is_object() || doc.value("format", "") != "shapfair-game-v1")
        throw format_error(path + ": not a shapfair-game-v1 table");
    if (!doc.contains("n") || !doc["n"].is_number_integer())
        throw format_error(path + ": missing integer field 'n'");
    const int n = doc["n"].get<int>();
    if (n < 1 || n > kMaxTablePlayers)
        throw format_error(path + ": n must be in 1.." + std::to_string(kMaxTablePlayers));
    if (!doc.contains("values") || !doc["values"].is_object())
        throw format_error(path + ": missing 'values' object");
    const auto& values = doc["values"];
    GameTable t;
    t.n = n;
    t.values.resize(std::size_t{1} << n);
    for (std::uint64_t mask = 0; mask < t.values.size(); ++mask) {
        const std::string key = std::to_string(mask);
        if (!values.contains(key))
            throw format_error(path + ": missing coalition key \"" + key + "\"");
        const auto& cell = values[key];
        if (!cell.is_number())
            throw format_error(path + ": value for key \"" + key + "\" is not a number");
        const double v = cell.get<double>();
        if (!std::isfinite(v))
            throw format_error(path + ": non-finite value for key \"" + key + "\"");
        t.values[mask] = v;
    }
    return game_from_table(std::move(t));
}

} // namespace shapfair
