#include "shapfair/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "shapfair/exact.hpp"

namespace shapfair {

namespace {

using nlohmann::json;

json json_num(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

json json_opt(const std::optional<double>& v) {
    if (!v) return nullptr;
    return json_num(*v);
}

std::string csv_opt(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
}

bool valid_label(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-')
            return false;
    return true;
}

// --- game spec parsing ---

const char* kBuiltins[] = {"additive", "majority", "glove", "airport", "duplicated"};

void check_game_spec(const json& spec, std::vector<std::string>& issues,
                     const std::string& where) {
    if (!spec.is_object()) {
        issues.push_back(where + ": must be an object");
        return;
    }
    const int selectors = spec.contains("builtin") + spec.contains("table") +
                          spec.contains("subprocess");
    if (selectors != 1) {
        issues.push_back(where + ": exactly one of builtin/table/subprocess required");
        return;
    }
    if (spec.contains("builtin")) {
        const std::string family = spec["builtin"].is_string() ? spec["builtin"].get<std::string>() : "";
        if (std::find(std::begin(kBuiltins), std::end(kBuiltins), family) ==
            std::end(kBuiltins)) {
            issues.push_back(where + ".builtin: unknown family \"" + family + "\"");
            return;
        }
        auto all_numbers = [](const json& arr) {
            for (const auto& v : arr)
                if (!v.is_number()) return false;
            return true;
        };
        auto all_integers = [](const json& arr) {
            for (const auto& v : arr)
                if (!v.is_number_integer()) return false;
            return true;
        };
        if (family == "additive" || family == "airport") {
            if (!spec.contains("weights") || !spec["weights"].is_array() ||
                spec["weights"].empty() || !all_numbers(spec["weights"]))
                issues.push_back(where + ".weights: " + family +
                                 " needs a non-empty numeric weight array");
        } else if (family == "majority") {
            if (!spec.contains("n") || !spec["n"].is_number_integer() ||
                spec["n"].get<int>() < 1 || spec["n"].get<int>() > 64)
                issues.push_back(where + ".n: majority needs n in 1..64");
        } else if (family == "glove") {
            if (!spec.contains("left") || !spec.contains("right") ||
                !spec["left"].is_array() || !spec["right"].is_array() ||
                !all_integers(spec["left"]) || !all_integers(spec["right"]))
                issues.push_back(where + ": glove needs integer left/right player arrays");
        } else if (family == "duplicated") {
            if (!spec.contains("base"))
                issues.push_back(where + ".base: duplicated needs a base game spec");
            else
                check_game_spec(spec["base"], issues, where + ".base");
        }
    } else if (spec.contains("table")) {
        if (!spec["table"].is_string() || spec["table"].get<std::string>().empty())
            issues.push_back(where + ".table: must be a file path");
    } else {
        const auto& sub = spec["subprocess"];
        if (!sub.is_object() || !sub.contains("command") || !sub["command"].is_string())
            issues.push_back(where + ".subprocess.command: required string");
        if (!sub.is_object() || !sub.contains("n") || !sub["n"].is_number_integer() ||
            sub["n"].get<int>() < 1 || sub["n"].get<int>() > 64)
            issues.push_back(where + ".subprocess.n: required, 1..64");
    }
}

GaeConfig parse_estimator_config(const json& e, std::vector<std::string>& issues,
                                 const std::string& where) {
    static const char* known[] = {"kind",          "label",           "m_bootstrap",
                                  "m_budget",      "xi",              "alpha",
                                  "epsilon1",      "selection",       "fs_formula",
                                  "shared_bootstrap", "shared_proposal", "refit_every",
                                  "record_trace"};
    for (auto it = e.begin(); it != e.end(); ++it)
        if (std::find_if(std::begin(known), std::end(known), [&](const char* k) {
                return it.key() == k;
            }) == std::end(known))
            issues.push_back(where + ": unknown field \"" + it.key() + "\"");
    GaeConfig c;
    auto num = [&](const char* key, double fallback, double lo, bool integer) {
        if (!e.contains(key)) return fallback;
        if (!e[key].is_number() || (integer && !e[key].is_number_integer())) {
            issues.push_back(where + "." + key +
                             (integer ? ": must be an integer" : ": must be a number"));
            return fallback;
        }
        const double v = e[key].get<double>();
        if (v < lo) issues.push_back(where + "." + key + ": must be >= " + format_double(lo));
        return v;
    };
    auto flag = [&](const char* key, bool fallback) {
        if (!e.contains(key)) return fallback;
        if (!e[key].is_boolean()) {
            issues.push_back(where + "." + key + ": must be a boolean");
            return fallback;
        }
        return e[key].get<bool>();
    };
    c.m_bootstrap = static_cast<long>(num("m_bootstrap", 20, 2, true));
    c.m_budget = static_cast<long>(num("m_budget", 2000, 0, true));
    c.xi = num("xi", 1e-3, 0.0, false);
    if (c.xi <= 0.0) issues.push_back(where + ".xi: must be > 0");
    c.alpha = num("alpha", 2.0, 0.0, false);
    c.epsilon1 = num("epsilon1", 0.0, 0.0, false);
    c.refit_every = static_cast<long>(num("refit_every", 0, 0, true));
    if (e.contains("selection")) {
        const std::string s = e["selection"].is_string() ? e["selection"].get<std::string>() : "";
        if (s == "greedy_min_fs")
            c.selection = Selection::greedy_min_fs;
        else if (s == "delta_p")
            c.selection = Selection::delta_p;
        else
            issues.push_back(where + ".selection: must be greedy_min_fs or delta_p");
    }
    if (c.selection == Selection::delta_p && !(c.epsilon1 > 0.0))
        issues.push_back(where + ".epsilon1: required (> 0) for delta_p selection");
    if (e.contains("fs_formula")) {
        const std::string s = e["fs_formula"].is_string() ? e["fs_formula"].get<std::string>() : "";
        if (s == "def2")
            c.fs_formula = FsFormula::def2;
        else if (s == "alg1")
            c.fs_formula = FsFormula::alg1;
        else
            issues.push_back(where + ".fs_formula: must be def2 or alg1");
    }
    c.shared_bootstrap = flag("shared_bootstrap", false);
    c.shared_proposal = flag("shared_proposal", false);
    c.record_trace = flag("record_trace", false);
    return c;
}

json estimator_to_json(const EstimatorSpec& e) {
    json out{{"kind", e.kind},
             {"label", e.label},
             {"m_bootstrap", e.config.m_bootstrap},
             {"m_budget", e.config.m_budget},
             {"xi", e.config.xi},
             {"alpha", e.config.alpha},
             {"selection", e.config.selection == Selection::delta_p ? "delta_p"
                                                                    : "greedy_min_fs"},
             {"fs_formula", e.config.fs_formula == FsFormula::alg1 ? "alg1" : "def2"},
             {"shared_bootstrap", e.config.shared_bootstrap},
             {"shared_proposal", e.config.shared_proposal},
             {"refit_every", e.config.refit_every},
             {"record_trace", e.config.record_trace}};
    if (e.config.epsilon1 > 0.0) out["epsilon1"] = e.config.epsilon1;
    return out;
}

} // namespace

std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

ExperimentConfig ExperimentConfig::parse(const json& doc) {
    std::vector<std::string> issues;
    ExperimentConfig config;
    if (!doc.is_object()) throw config_error({"config: must be a JSON object"});

    static const char* known[] = {"game",      "estimators", "epsilon1_grid",
                                  "trials",    "seed",       "reference",
                                  "output_dir", "threads",   "sweep"};
    for (auto it = doc.begin(); it != doc.end(); ++it)
        if (std::find_if(std::begin(known), std::end(known), [&](const char* k) {
                return it.key() == k;
            }) == std::end(known))
            issues.push_back("unknown field \"" + it.key() + "\"");

    if (!doc.contains("game")) {
        issues.push_back("game: required");
    } else {
        check_game_spec(doc["game"], issues, "game");
        config.game_spec = doc["game"];
    }

    if (!doc.contains("estimators") || !doc["estimators"].is_array() ||
        doc["estimators"].empty()) {
        issues.push_back("estimators: at least one required");
    } else {
        int index = 0;
        for (const auto& e : doc["estimators"]) {
            const std::string where = "estimators[" + std::to_string(index) + "]";
            EstimatorSpec spec;
            if (!e.is_object()) {
                issues.push_back(where + ": must be an object");
                ++index;
                continue;
            }
            spec.kind = e.value("kind", "");
            if (spec.kind != "mc" && spec.kind != "greedy" && spec.kind != "gae")
                issues.push_back(where + ".kind: must be mc, greedy or gae");
            spec.label = e.value("label", spec.kind + "_" + std::to_string(index));
            if (!valid_label(spec.label))
                issues.push_back(where + ".label: letters, digits, _ and - only");
            spec.config = parse_estimator_config(e, issues, where);
            config.estimators.push_back(std::move(spec));
            ++index;
        }
        for (std::size_t a = 0; a < config.estimators.size(); ++a)
            for (std::size_t b = a + 1; b < config.estimators.size(); ++b)
                if (config.estimators[a].label == config.estimators[b].label)
                    issues.push_back("estimators: duplicate label \"" +
                                     config.estimators[a].label + "\"");
    }

    if (doc.contains("epsilon1_grid")) {
        config.epsilon1_grid.clear();
        if (!doc["epsilon1_grid"].is_array() || doc["epsilon1_grid"].empty())
            issues.push_back("epsilon1_grid: non-empty array required");
        else
            for (const auto& v : doc["epsilon1_grid"]) {
                if (!v.is_number() || !(v.get<double>() > 0.0)) {
                    issues.push_back("epsilon1_grid: entries must be > 0");
                    break;
                }
                config.epsilon1_grid.push_back(v.get<double>());
            }
    }

    config.trials = doc.value("trials", 1);
    if (config.trials < 1) issues.push_back("trials: must be >= 1");
    if (doc.contains("seed")) {
        if (doc["seed"].is_number_unsigned() || doc["seed"].is_number_integer())
            config.seed = doc["seed"].get<std::uint64_t>();
        else
            issues.push_back("seed: must be an unsigned integer");
    }
    config.threads = doc.value("threads", 1);
    if (config.threads < 1) issues.push_back("threads: must be >= 1");
    config.output_dir = doc.value("output_dir", std::string("out"));

    if (doc.contains("reference")) {
        const auto& ref = doc["reference"];
        if (ref.is_string() && ref.get<std::string>() == "exact") {
            config.reference_exact = true;
        } else if (ref.is_object() && ref.contains("file") && ref["file"].is_string()) {
            config.reference_exact = false;
            config.reference_path = ref["file"].get<std::string>();
        } else {
            issues.push_back("reference: must be \"exact\" or {\"file\": path}");
        }
    }

    if (doc.contains("sweep")) {
        SweepSpec sweep;
        const auto& s = doc["sweep"];
        if (!s.is_object() || !s.contains("axis") || !s["axis"].is_string() ||
            !s.contains("values") || !s["values"].is_array() || s["values"].empty()) {
            issues.push_back("sweep: needs axis and a non-empty values array");
        } else {
            sweep.axis = s["axis"].get<std::string>();
            if (sweep.axis != "budget" && sweep.axis != "epsilon1" && sweep.axis != "alpha")
                issues.push_back("sweep.axis: must be budget, epsilon1 or alpha");
            for (const auto& v : s["values"]) {
                if (!v.is_number()) {
                    issues.push_back("sweep.values: entries must be numbers");
                    break;
                }
                sweep.values.push_back(v.get<double>());
            }
            for (double v : sweep.values) {
                if (sweep.axis == "budget" && (v < 0 || v != std::floor(v)))
                    issues.push_back("sweep.values: budgets must be non-negative integers");
                if (sweep.axis == "epsilon1" && !(v > 0))
                    issues.push_back("sweep.values: epsilon1 values must be > 0");
                if (sweep.axis == "alpha" && !(v >= 0))
                    issues.push_back("sweep.values: alpha values must be >= 0");
            }
            config.sweep = std::move(sweep);
        }
    }

    // Capacity of the exact reference.
    if (issues.empty() && config.reference_exact) {
        const int n = player_count_of(config.game_spec);
        if (n > kMaxSubsetPlayers)
            issues.push_back("reference: exact needs n <= " +
                             std::to_string(kMaxSubsetPlayers) + ", game has " +
                             std::to_string(n) + " players");
    }

    if (!issues.empty()) throw config_error(issues);
    return config;
}

json ExperimentConfig::echo() const {
    json doc;
    doc["game"] = game_spec;
    doc["estimators"] = json::array();
    for (const auto& e : estimators) doc["estimators"].push_back(estimator_to_json(e));
    doc["epsilon1_grid"] = epsilon1_grid;
    doc["trials"] = trials;
    doc["seed"] = seed;
    doc["reference"] = reference_exact ? json("exact") : json{{"file", reference_path}};
    doc["output_dir"] = output_dir;
    doc["threads"] = threads;
    if (sweep) doc["sweep"] = json{{"axis", sweep->axis}, {"values", sweep->values}};
    return doc;
}

int player_count_of(const json& spec) {
    if (spec.contains("builtin")) {
        const std::string family = spec["builtin"].get<std::string>();
        if (family == "additive" || family == "airport")
            return static_cast<int>(spec["weights"].size());
        if (family == "majority") return spec["n"].get<int>();
        if (family == "glove")
            return static_cast<int>(spec["left"].size() + spec["right"].size());
        if (family == "duplicated") return 2 * player_count_of(spec["base"]);
        throw invalid_argument_error("unknown builtin family: " + family);
    }
    if (spec.contains("table")) {
        const json doc = load_json_file(spec["table"].get<std::string>());
        if (!doc.contains("n") || !doc["n"].is_number_integer())
            throw format_error(spec["table"].get<std::string>() + ": missing field 'n'");
        return doc["n"].get<int>();
    }
    if (spec.contains("subprocess")) return spec["subprocess"]["n"].get<int>();
    throw invalid_argument_error("malformed game spec");
}

CooperativeGame build_game(const json& spec) {
    if (spec.contains("builtin")) {
        const std::string family = spec["builtin"].get<std::string>();
        if (family == "additive")
            return make_additive(spec["weights"].get<std::vector<double>>());
        if (family == "airport")
            return make_airport(spec["weights"].get<std::vector<double>>());
        if (family == "majority") return make_majority(spec["n"].get<int>());
        if (family == "glove")
            return make_glove(spec["left"].get<std::vector<int>>(),
                              spec["right"].get<std::vector<int>>());
        if (family == "duplicated") return make_duplicated(build_game(spec["base"]));
        throw invalid_argument_error("unknown builtin family: " + family);
    }
    if (spec.contains("table")) return load_table(spec["table"].get<std::string>());
    if (spec.contains("subprocess")) {
        const auto& sub = spec["subprocess"];
        return make_subprocess_game(sub["command"].get<std::string>(), sub["n"].get<int>(),
                                    sub.value("timeout_s", 60.0));
    }
    throw invalid_argument_error("malformed game spec");
}

namespace {

struct PairSets {
    std::vector<std::pair<int, int>> symmetric;
    std::vector<std::pair<int, int>> desirable;
};

// Symmetric pairs drive A2, ordered desirable pairs drive A3. Clone pairs of
// a duplicated game are symmetric by construction; otherwise (and for A3)
// pairs come from brute-force clause checks, which we cap at 12 players.
PairSets derive_pairs(const CooperativeGame& game, const json& spec) {
    PairSets pairs;
    const int n = game.player_count();
    const bool duplicated =
        spec.contains("builtin") && spec["builtin"].get<std::string>() == "duplicated";
    if (duplicated) {
        for (int i = 0; i < n / 2; ++i) pairs.symmetric.emplace_back(i, i + n / 2);
    }
    if (n <= 12) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                const auto clauses = check_axiom_clauses(game, i, j);
                if (clauses.symmetric && i < j && !duplicated)
                    pairs.symmetric.emplace_back(i, j);
                if (clauses.strictly_desirable) pairs.desirable.emplace_back(i, j);
            }
    }
    return pairs;
}

TrialMetrics evaluate_trial(const EstimatorSpec& spec, int trial,
                            EstimationResult result, const std::vector<double>& phi_ref,
                            const PairSets& pairs,
                            const std::vector<double>& epsilon1_grid) {
    TrialMetrics out;
    out.estimator = spec.label;
    out.trial = trial;
    out.estimation = std::move(result);
    out.fidelity = fidelity_report(out.estimation, spec.config.xi);
    out.min_fs = out.fidelity.min_fs;
    for (long m : out.estimation.m_per_player) out.budget += m;

    std::vector<double> finite_fs;
    for (double f : out.fidelity.fs) {
        if (std::isfinite(f))
            finite_fs.push_back(f);
        else
            ++out.nl_nsw_excluded;
    }
    if (!finite_fs.empty()) out.nl_nsw_value = nl_nsw(finite_fs);

    const auto rm = rank_metrics(phi_ref, out.estimation.phi_hat);
    out.n_inv = rm.n_inv;
    out.eps_inv = rm.eps_inv;
    out.mape = rm.mape;
    out.mse = rm.mse;

    const double xi = spec.config.xi;
    bool primary = true;
    for (double eps1 : epsilon1_grid) {
        PerEpsilonMetrics pe;
        pe.epsilon1 = eps1;
        const auto a1 = check_a1(phi_ref, out.estimation.phi_hat, eps1, xi);
        pe.a1_violations = static_cast<long>(a1.violations.size());
        if (primary) out.eps_abs = a1.eps_abs;
        if (!pairs.symmetric.empty()) {
            const auto a2 =
                check_a2(phi_ref, out.estimation.phi_hat, eps1, xi, pairs.symmetric);
            pe.a2_rate = a2.violation_rate;
            if (primary) {
                out.a2_logsum = a2.deviation_ratio_logsum;
                out.a2_flagged = a2.flagged_ratios;
                out.a2_pairs = a2.pairs;
            }
        }
        if (!pairs.desirable.empty())
            pe.a3_rate = check_a3(phi_ref, out.estimation.phi_hat, eps1, xi, pairs.desirable);
        pe.delta_independent =
            delta_bound(out.min_fs, eps1, static_cast<int>(phi_ref.size()), true);
        pe.delta_dependent =
            delta_bound(out.min_fs, eps1, static_cast<int>(phi_ref.size()), false);
        pe.delta_dependent_per_player = delta_bound_per_player(out.fidelity.fs, eps1);
        out.per_epsilon.push_back(pe);
        primary = false;
    }
    return out;
}

EstimationResult run_one(const CooperativeGame& game, const EstimatorSpec& spec,
                         std::uint64_t seed, int trial) {
    GaeConfig config = spec.config;
    config.seed = seed;
    if (spec.kind == "mc") return estimate_mc(game, config, trial);
    if (spec.kind == "greedy") return estimate_greedy(game, config, trial);
    return estimate_gae(game, config, trial);
}

} // namespace

RunReport run_estimate(const ExperimentConfig& config) {
    RunReport report;
    report.config = config;
    CooperativeGame game = build_game(config.game_spec);
    const int n = game.player_count();

    report.phi_ref = config.reference_exact
                         ? exact_shapley_subsets(game)
                         : load_phi_file(config.reference_path, n);
    const PairSets pairs = derive_pairs(game, config.game_spec);
    report.symmetric_pairs = pairs.symmetric;
    report.desirable_pairs = pairs.desirable;

    struct Cell {
        const EstimatorSpec* spec;
        int trial;
    };
    std::vector<Cell> cells;
    for (const auto& spec : config.estimators)
        for (int t = 0; t < config.trials; ++t) cells.push_back({&spec, t});
    std::vector<TrialMetrics> results(cells.size());

    const int workers = std::min<int>(config.threads, static_cast<int>(cells.size()));
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= cells.size() || failed.load()) return;
            try {
                auto estimation = run_one(game, *cells[k].spec, config.seed, cells[k].trial);
                results[k] = evaluate_trial(*cells[k].spec, cells[k].trial,
                                            std::move(estimation), report.phi_ref, pairs,
                                            config.epsilon1_grid);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                failed.store(true);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    report.trials = std::move(results);
    return report;
}

namespace {

json aggregate_metrics(const RunReport& report) {
    json aggregates = json::array();
    for (const auto& spec : report.config.estimators) {
        // Collect named metric values across this estimator's trials.
        std::vector<std::pair<std::string, std::vector<double>>> columns;
        auto push = [&](const std::string& name, double v) {
            for (auto& [key, values] : columns)
                if (key == name) {
                    values.push_back(v);
                    return;
                }
            columns.push_back({name, {v}});
        };
        for (const auto& trial : report.trials) {
            if (trial.estimator != spec.label) continue;
            push("min_fs", trial.min_fs);
            if (trial.nl_nsw_value) push("nl_nsw", *trial.nl_nsw_value);
            if (trial.eps_abs) push("eps_abs", *trial.eps_abs);
            if (trial.a2_logsum) push("a2_logsum", *trial.a2_logsum);
            if (trial.mape) push("mape", *trial.mape);
            push("mse", trial.mse);
            push("n_inv", static_cast<double>(trial.n_inv));
            push("eps_inv", trial.eps_inv);
            for (const auto& pe : trial.per_epsilon) {
                const std::string suffix = "@" + format_double(pe.epsilon1);
                push("a1_violations" + suffix, static_cast<double>(pe.a1_violations));
                if (pe.a2_rate) push("a2_rate" + suffix, *pe.a2_rate);
                if (pe.a3_rate) push("a3_rate" + suffix, *pe.a3_rate);
                push("delta_independent" + suffix, pe.delta_independent);
                push("delta_dependent" + suffix, pe.delta_dependent);
            }
        }
        json entry{{"estimator", spec.label}, {"metrics", json::object()}};
        for (const auto& [name, values] : columns) {
            double mean = 0.0;
            for (double v : values) mean += v;
            mean /= static_cast<double>(values.size());
            double ss = 0.0;
            for (double v : values) ss += (v - mean) * (v - mean);
            const double stderr_ =
                values.size() > 1
                    ? std::sqrt(ss / static_cast<double>(values.size() - 1) /
                                static_cast<double>(values.size()))
                    : 0.0;
            entry["metrics"][name] = {{"mean", json_num(mean)},
                                      {"stderr", json_num(stderr_)},
                                      {"count", values.size()}};
        }
        aggregates.push_back(std::move(entry));
    }
    return aggregates;
}

json trial_to_json(const TrialMetrics& t, bool include_trace) {
    json doc{{"estimator", t.estimator},
             {"trial", t.trial},
             {"budget", t.budget},
             {"min_fs", json_num(t.min_fs)},
             {"nl_nsw", json_opt(t.nl_nsw_value)},
             {"nl_nsw_excluded", t.nl_nsw_excluded},
             {"eps_abs", json_opt(t.eps_abs)},
             {"a2_logsum", json_opt(t.a2_logsum)},
             {"a2_flagged", t.a2_flagged},
             {"n_inv", t.n_inv},
             {"eps_inv", json_num(t.eps_inv)},
             {"mape", json_opt(t.mape)},
             {"mse", json_num(t.mse)}};
    doc["phi_hat"] = json::array();
    for (double v : t.estimation.phi_hat) doc["phi_hat"].push_back(json_num(v));
    doc["m_per_player"] = t.estimation.m_per_player;
    doc["fs"] = json::array();
    for (double v : t.fidelity.fs) doc["fs"].push_back(json_num(v));
    doc["invariability"] = json::array();
    for (double v : t.fidelity.invariability) doc["invariability"].push_back(json_num(v));
    doc["theta"] = t.estimation.proposal.theta;
    doc["per_epsilon"] = json::array();
    for (const auto& pe : t.per_epsilon)
        doc["per_epsilon"].push_back(
            {{"epsilon1", pe.epsilon1},
             {"a1_violations", pe.a1_violations},
             {"a2_rate", json_opt(pe.a2_rate)},
             {"a3_rate", json_opt(pe.a3_rate)},
             {"delta_independent", json_num(pe.delta_independent)},
             {"delta_dependent", json_num(pe.delta_dependent)},
             {"delta_dependent_per_player", json_num(pe.delta_dependent_per_player)}});
    if (!t.a2_pairs.empty()) {
        doc["a2_pairs"] = json::array();
        for (const auto& pd : t.a2_pairs)
            doc["a2_pairs"].push_back({{"i", pd.i},
                                       {"j", pd.j},
                                       {"deviation", json_num(pd.deviation)},
                                       {"threshold", json_num(pd.threshold)},
                                       {"ratio", json_num(pd.ratio)},
                                       {"flagged", pd.ratio_flagged}});
    }
    if (include_trace) {
        doc["trace"] = json::array();
        for (const auto& rec : t.estimation.trace)
            doc["trace"].push_back({{"step", rec.step},
                                    {"player", rec.player},
                                    {"cardinality", rec.cardinality},
                                    {"predecessors", rec.predecessors},
                                    {"sigma", json_num(rec.sigma)},
                                    {"weight", json_num(rec.weight)},
                                    {"fs_after", json_num(rec.fs_after)}});
    }
    return doc;
}

const EstimatorSpec* find_spec(const RunReport& report, const std::string& label) {
    for (const auto& spec : report.config.estimators)
        if (spec.label == label) return &spec;
    return nullptr;
}

void write_metrics_csv(const RunReport& report, const std::string& path) {
    std::ofstream out(path);
    out << "estimator,trial,budget,min_fs,nl_nsw,nl_nsw_excluded,eps_abs,a1_violations,"
           "a2_rate,a2_logsum,a2_flagged,a3_rate,n_inv,eps_inv,mape,mse\n";

    // One row per trial plus one mean row per estimator. Optional metrics are
    // averaged over the trials where they exist and left empty otherwise.
    using Cell = std::optional<double>;
    auto cells = [](const TrialMetrics& t) {
        const auto& pe = t.per_epsilon.front();
        return std::vector<Cell>{static_cast<double>(t.budget),
                                 t.min_fs,
                                 t.nl_nsw_value,
                                 static_cast<double>(t.nl_nsw_excluded),
                                 t.eps_abs,
                                 static_cast<double>(pe.a1_violations),
                                 pe.a2_rate,
                                 t.a2_logsum,
                                 static_cast<double>(t.a2_flagged),
                                 pe.a3_rate,
                                 static_cast<double>(t.n_inv),
                                 t.eps_inv,
                                 t.mape,
                                 t.mse};
    };
    auto write_row = [&](const std::string& label, const std::string& trial,
                         const std::vector<Cell>& values) {
        out << label << ',' << trial;
        for (const auto& v : values) out << ',' << csv_opt(v);
        out << '\n';
    };
    for (const auto& spec : report.config.estimators) {
        std::vector<Cell> sums(14);
        std::vector<int> counts(14, 0);
        for (const auto& t : report.trials) {
            if (t.estimator != spec.label) continue;
            const auto values = cells(t);
            write_row(t.estimator, std::to_string(t.trial), values);
            for (std::size_t k = 0; k < values.size(); ++k)
                if (values[k]) {
                    sums[k] = sums[k].value_or(0.0) + *values[k];
                    ++counts[k];
                }
        }
        std::vector<Cell> means(14);
        for (std::size_t k = 0; k < sums.size(); ++k)
            if (counts[k] > 0) means[k] = *sums[k] / counts[k];
        write_row(spec.label, "mean", means);
    }
}

void write_axioms_csv(const RunReport& report, const std::string& path) {
    std::ofstream out(path);
    out << "estimator,trial,epsilon1,a1_violations,a2_rate,a3_rate,delta_independent,"
           "delta_dependent,delta_dependent_per_player\n";
    for (const auto& t : report.trials)
        for (const auto& pe : t.per_epsilon)
            out << t.estimator << ',' << t.trial << ',' << format_double(pe.epsilon1) << ','
                << pe.a1_violations << ',' << csv_opt(pe.a2_rate) << ','
                << csv_opt(pe.a3_rate) << ',' << format_double(pe.delta_independent) << ','
                << format_double(pe.delta_dependent) << ','
                << format_double(pe.delta_dependent_per_player) << '\n';
}

void write_phi_csv(const RunReport& report, const std::string& path) {
    std::ofstream out(path);
    out << "estimator,trial,player,phi_hat,phi_ref,ape,m,fs,invariability\n";
    for (const auto& t : report.trials) {
        const int n = static_cast<int>(t.estimation.phi_hat.size());
        for (int i = 0; i < n; ++i) {
            const double ref = report.phi_ref[i];
            out << t.estimator << ',' << t.trial << ',' << i << ','
                << format_double(t.estimation.phi_hat[i]) << ',' << format_double(ref)
                << ',';
            if (ref != 0.0)
                out << format_double(std::abs((t.estimation.phi_hat[i] - ref) / ref));
            out << ',' << t.estimation.m_per_player[i] << ','
                << format_double(t.fidelity.fs[i]) << ','
                << format_double(t.fidelity.invariability[i]) << '\n';
        }
    }
}

} // namespace

void write_estimate_outputs(const RunReport& report, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    json doc;
    doc["format"] = "shapfair-report-v1";
    doc["versions"] = {{"shapfair", kVersion}, {"rng", kRngVersion}};
    doc["config"] = report.config.echo();
    doc["phi_ref"] = json::array();
    for (double v : report.phi_ref) doc["phi_ref"].push_back(json_num(v));
    doc["symmetric_pairs"] = report.symmetric_pairs;
    doc["desirable_pairs"] = report.desirable_pairs;
    doc["trials"] = json::array();
    for (const auto& t : report.trials) {
        const EstimatorSpec* spec = find_spec(report, t.estimator);
        doc["trials"].push_back(trial_to_json(t, spec && spec->config.record_trace));
    }
    doc["aggregates"] = aggregate_metrics(report);

    std::ofstream out(out_dir + "/report.json");
    out << doc.dump(2) << '\n';
    write_metrics_csv(report, out_dir + "/metrics.csv");
    write_axioms_csv(report, out_dir + "/axioms.csv");
    write_phi_csv(report, out_dir + "/phi.csv");
}

void run_sweep(const ExperimentConfig& config, const std::string& out_dir) {
    if (!config.sweep) throw config_error({"sweep: section required for the sweep command"});
    std::filesystem::create_directories(out_dir);
    std::ofstream out(out_dir + "/sweep.csv");
    out << "axis,value,estimator,trial,min_fs,a2_rate,deviation_logsum,mape,mse,nl_nsw\n";
    for (double value : config.sweep->values) {
        ExperimentConfig point = config;
        point.sweep.reset();
        if (config.sweep->axis == "budget") {
            for (auto& e : point.estimators) e.config.m_budget = static_cast<long>(value);
        } else if (config.sweep->axis == "epsilon1") {
            point.epsilon1_grid = {value};
        } else {
            for (auto& e : point.estimators)
                if (e.kind == "gae") e.config.alpha = value;
        }
        const RunReport report = run_estimate(point);
        for (const auto& t : report.trials) {
            const auto& pe = t.per_epsilon.front();
            out << config.sweep->axis << ',' << format_double(value) << ',' << t.estimator
                << ',' << t.trial << ',' << format_double(t.min_fs) << ','
                << csv_opt(pe.a2_rate) << ',' << csv_opt(t.a2_logsum) << ','
                << csv_opt(t.mape) << ',' << format_double(t.mse) << ','
                << csv_opt(t.nl_nsw_value) << '\n';
        }
    }
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw format_error("cannot open " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw format_error(path + ": " + e.what());
    }
    return doc;
}

std::vector<double> load_phi_file(const std::string& path, int expected_n) {
    const json doc = load_json_file(path);
    if (!doc.is_object() || doc.value("format", "") != "shapfair-phi-v1" ||
        !doc.contains("phi") || !doc["phi"].is_array())
        throw format_error(path + ": not a shapfair-phi-v1 file");
    std::vector<double> phi;
    for (const auto& v : doc["phi"]) {
        if (!v.is_number()) throw format_error(path + ": phi entries must be numbers");
        phi.push_back(v.get<double>());
    }
    if (static_cast<int>(phi.size()) != expected_n)
        throw format_error(path + ": phi has " + std::to_string(phi.size()) +
                           " entries, game has " + std::to_string(expected_n) + " players");
    return phi;
}

void save_phi_file(const std::vector<double>& phi, const std::string& path) {
    json doc{{"format", "shapfair-phi-v1"}, {"phi", phi}};
    std::ofstream out(path);
    if (!out) throw format_error("cannot open " + path + " for writing");
    out << doc.dump(2) << '\n';
}

} // namespace shapfair
