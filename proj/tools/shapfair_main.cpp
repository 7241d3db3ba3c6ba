// shapfair: exact Shapley values, fairness-aware estimation runs, sweeps and
// verification suites over cooperative games.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "shapfair/exact.hpp"
#include "shapfair/experiment.hpp"
#include "shapfair/verify.hpp"

namespace {

using nlohmann::json;
using namespace shapfair;

json game_spec_from_flags(const std::string& builtin, const std::vector<double>& weights,
                          int n, const std::vector<int>& left,
                          const std::vector<int>& right, const std::string& table,
                          const std::string& config_path) {
    if (!config_path.empty()) {
        const auto config = ExperimentConfig::parse(load_json_file(config_path));
        return config.game_spec;
    }
    if (!table.empty()) return json{{"table", table}};
    if (builtin.empty())
        throw config_error({"exact: one of --builtin, --table or --config required"});
    json spec{{"builtin", builtin}};
    if (builtin == "additive" || builtin == "airport") {
        if (weights.empty()) throw config_error({"exact: --weights required for " + builtin});
        spec["weights"] = weights;
    } else if (builtin == "majority") {
        if (n < 1) throw config_error({"exact: --n required for majority"});
        spec["n"] = n;
    } else if (builtin == "glove") {
        if (left.empty() || right.empty())
            throw config_error({"exact: --left and --right required for glove"});
        spec["left"] = left;
        spec["right"] = right;
    } else {
        throw config_error({"exact: unsupported builtin \"" + builtin +
                            "\" (use a config file for duplicated games)"});
    }
    return spec;
}

json num_array(const std::vector<double>& v) {
    json arr = json::array();
    for (double x : v) arr.push_back(x);
    return arr;
}

int cmd_exact(const json& game_spec) {
    auto game = build_game(game_spec);
    const auto profile = exact_moments(game); // enforces the n <= 10 oracle cap
    json doc;
    doc["format"] = "shapfair-exact-v1";
    doc["n"] = game.player_count();
    doc["phi"] = num_array(profile.phi);
    doc["phi_subsets"] = num_array(exact_shapley_subsets(game));
    doc["variance_uniform"] = num_array(profile.variance_uniform);
    doc["mean_by_cardinality"] = profile.mean_by_cardinality;
    doc["mean_sq_by_cardinality"] = profile.mean_sq_by_cardinality;
    std::cout << doc.dump(2) << '\n';
    return 0;
}

ExperimentConfig load_config(const std::string& path, const std::string& out_override,
                             std::uint64_t seed_override, bool seed_set,
                             int threads_override) {
    auto config = ExperimentConfig::parse(load_json_file(path));
    if (!out_override.empty()) config.output_dir = out_override;
    if (seed_set) config.seed = seed_override;
    if (threads_override > 0) config.threads = threads_override;
    if (const char* env = std::getenv("SHAPFAIR_THREADS")) {
        const int t = std::atoi(env);
        if (t > 0) config.threads = t;
    }
    return config;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Shapley value estimation with fairness guarantees"};
    app.require_subcommand(1);

    std::string config_path, out_dir, table_path, builtin, axis, suite;
    std::vector<double> weights;
    std::vector<int> left, right;
    int n = 0;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;

    auto* exact = app.add_subcommand("exact", "Exact Shapley values and moment profile");
    exact->add_option("--builtin", builtin, "additive|majority|glove|airport");
    exact->add_option("--weights", weights, "weights for additive/airport")->delimiter(',');
    exact->add_option("--n", n, "player count for majority");
    exact->add_option("--left", left, "left glove holders")->delimiter(',');
    exact->add_option("--right", right, "right glove holders")->delimiter(',');
    exact->add_option("--table", table_path, "game table file");
    exact->add_option("--config", config_path, "take the game from an experiment config");

    auto* estimate = app.add_subcommand("estimate", "Run configured estimators over trials");
    estimate->add_option("--config", config_path, "experiment config file")->required();
    estimate->add_option("--out", out_dir, "output directory override");
    estimate->add_option("--seed", seed, "seed override")->each([&](const std::string&) {
        seed_set = true;
    });
    estimate->add_option("--threads", threads, "worker threads (SHAPFAIR_THREADS overrides)");

    auto* sweep = app.add_subcommand("sweep", "Sweep one axis and emit a long-format CSV");
    sweep->add_option("--config", config_path, "experiment config file")->required();
    sweep->add_option("--axis", axis, "budget|epsilon1|alpha (overrides config)");
    sweep->add_option("--out", out_dir, "output directory override");
    sweep->add_option("--seed", seed, "seed override")->each([&](const std::string&) {
        seed_set = true;
    });
    sweep->add_option("--threads", threads, "worker threads");

    auto* verify = app.add_subcommand("verify", "Run a verification suite");
    verify->add_option("suite", suite, "oracle|unbiased|prop3|chebyshev|proposal")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (exact->parsed()) {
            return cmd_exact(game_spec_from_flags(builtin, weights, n, left, right,
                                                  table_path, config_path));
        }
        if (estimate->parsed()) {
            const auto config = load_config(config_path, out_dir, seed, seed_set, threads);
            const auto report = run_estimate(config);
            write_estimate_outputs(report, config.output_dir);
            std::cout << "wrote " << config.output_dir << "/report.json and CSV tables ("
                      << report.trials.size() << " trial rows)\n";
            return 0;
        }
        if (sweep->parsed()) {
            auto config = load_config(config_path, out_dir, seed, seed_set, threads);
            if (!axis.empty()) {
                if (!config.sweep)
                    throw config_error({"sweep: config has no sweep section to override"});
                config.sweep->axis = axis;
            }
            run_sweep(config, config.output_dir);
            std::cout << "wrote " << config.output_dir << "/sweep.csv\n";
            return 0;
        }
        if (verify->parsed()) {
            const auto result = run_verify_suite(suite);
            for (const auto& line : result.lines) std::cout << line << '\n';
            std::cout << (result.pass ? "PASS" : "FAIL") << " suite " << result.suite
                      << '\n';
            return result.pass ? 0 : 5;
        }
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const capacity_error& e) {
        std::cerr << "capacity error: " << e.what() << '\n';
        return 3;
    } catch (const external_utility_error& e) {
        std::cerr << "external utility error: " << e.what();
        if (!e.request_line.empty()) std::cerr << " (request: " << e.request_line << ")";
        std::cerr << '\n';
        return 4;
    } catch (const format_error& e) {
        std::cerr << "format error: " << e.what() << '\n';
        return 2;
    } catch (const invalid_argument_error& e) {
        std::cerr << "invalid argument: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
