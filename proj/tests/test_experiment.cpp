#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "shapfair/experiment.hpp"
#include "shapfair/verify.hpp"

using namespace shapfair;
using nlohmann::json;

#ifndef SHAPFAIR_CLI_PATH
#define SHAPFAIR_CLI_PATH "./shapfair"
#endif

namespace {

json minimal_config() {
    return json{{"game", {{"builtin", "glove"}, {"left", {0, 1}}, {"right", {2}}}},
                {"estimators",
                 {{{"kind", "gae"}, {"m_bootstrap", 4}, {"m_budget", 40}}}},
                {"epsilon1_grid", {0.5, 1.0}},
                {"trials", 3},
                {"seed", 11},
                {"reference", "exact"}};
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name)
        : path(std::filesystem::temp_directory_path() / name) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string str() const { return path.string(); }
};

int run_cli(const std::string& args) {
    const std::string cmd = std::string(SHAPFAIR_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

} // namespace

TEST_CASE("config validation lists every invalid field") {
    json bad = minimal_config();
    bad["trials"] = 0;
    bad["epsilon1_grid"] = json::array();
    bad["estimators"][0]["kind"] = "owen";
    bad["estimators"][0]["xi"] = -1.0;
    bad["what_is_this"] = 1;
    try {
        ExperimentConfig::parse(bad);
        FAIL("expected config_error");
    } catch (const config_error& e) {
        CHECK(e.issues.size() >= 5);
        bool saw_trials = false, saw_kind = false, saw_unknown = false;
        for (const auto& issue : e.issues) {
            if (issue.find("trials") != std::string::npos) saw_trials = true;
            if (issue.find("kind") != std::string::npos) saw_kind = true;
            if (issue.find("what_is_this") != std::string::npos) saw_unknown = true;
        }
        CHECK(saw_trials);
        CHECK(saw_kind);
        CHECK(saw_unknown);
    }
}

TEST_CASE("exact reference requires oracle capacity") {
    json config = minimal_config();
    config["game"] = {{"builtin", "majority"}, {"n", 25}};
    CHECK_THROWS_AS(ExperimentConfig::parse(config), config_error);
}

TEST_CASE("player_count_of handles every spec shape") {
    CHECK(player_count_of(json{{"builtin", "majority"}, {"n", 7}}) == 7);
    CHECK(player_count_of(json{{"builtin", "additive"}, {"weights", {1, 2}}}) == 2);
    CHECK(player_count_of(json{{"builtin", "duplicated"},
                               {"base", {{"builtin", "majority"}, {"n", 5}}}}) == 10);
    CHECK(player_count_of(json{{"subprocess", {{"command", "x"}, {"n", 9}}}}) == 9);
}

TEST_CASE("run_estimate produces a full report") {
    const auto config = ExperimentConfig::parse(minimal_config());
    const auto report = run_estimate(config);
    CHECK(report.trials.size() == 3);
    CHECK(report.phi_ref.size() == 3);
    CHECK(report.phi_ref[2] == doctest::Approx(2.0 / 3).epsilon(1e-12));
    // glove(L={0,1},R={2}) has one symmetric pair (0,1).
    REQUIRE(report.symmetric_pairs.size() == 1);
    CHECK(report.symmetric_pairs[0] == std::pair<int, int>{0, 1});
    CHECK_FALSE(report.desirable_pairs.empty());
    for (const auto& t : report.trials) {
        CHECK(t.budget == 3 * 4 + 40);
        CHECK(t.per_epsilon.size() == 2);
        CHECK(t.per_epsilon[0].delta_independent >= t.per_epsilon[1].delta_independent);
    }
}

TEST_CASE("duplicated games get clone pairs automatically") {
    json config = minimal_config();
    config["game"] = {{"builtin", "duplicated"},
                      {"base", {{"builtin", "additive"}, {"weights", {1.0, 2.0}}}}};
    config["trials"] = 1;
    const auto report = run_estimate(ExperimentConfig::parse(config));
    bool saw_clone_pair = false;
    for (const auto& p : report.symmetric_pairs)
        if (p == std::pair<int, int>{0, 2}) saw_clone_pair = true;
    CHECK(saw_clone_pair);
}

TEST_CASE("identical config and seed give byte-identical outputs") {
    TempDir a("shapfair_det_a"), b("shapfair_det_b");
    const auto config = ExperimentConfig::parse(minimal_config());
    write_estimate_outputs(run_estimate(config), a.str());
    write_estimate_outputs(run_estimate(config), b.str());
    for (const char* file : {"report.json", "metrics.csv", "axioms.csv", "phi.csv"}) {
        CAPTURE(file);
        CHECK(slurp(a.str() + "/" + file) == slurp(b.str() + "/" + file));
        CHECK_FALSE(slurp(a.str() + "/" + file).empty());
    }
}

TEST_CASE("threaded runs match single-threaded runs byte for byte") {
    TempDir a("shapfair_thr_a"), b("shapfair_thr_b");
    auto config = ExperimentConfig::parse(minimal_config());
    config.trials = 6;
    write_estimate_outputs(run_estimate(config), a.str());
    config.threads = 4;
    write_estimate_outputs(run_estimate(config), b.str());
    CHECK(slurp(a.str() + "/metrics.csv") == slurp(b.str() + "/metrics.csv"));
    CHECK(slurp(a.str() + "/phi.csv") == slurp(b.str() + "/phi.csv"));
}

TEST_CASE("the report echoes a config that reproduces the identical run") {
    TempDir a("shapfair_echo_a"), b("shapfair_echo_b");
    const auto config = ExperimentConfig::parse(minimal_config());
    const auto report = run_estimate(config);
    write_estimate_outputs(report, a.str());
    const json echoed = load_json_file(a.str() + "/report.json")["config"];
    const auto config2 = ExperimentConfig::parse(echoed);
    write_estimate_outputs(run_estimate(config2), b.str());
    CHECK(slurp(a.str() + "/metrics.csv") == slurp(b.str() + "/metrics.csv"));
}

TEST_CASE("metrics.csv schema: trial rows plus one aggregate row per estimator") {
    TempDir dir("shapfair_schema");
    json cfg = minimal_config();
    cfg["estimators"].push_back({{"kind", "mc"}, {"m_bootstrap", 4}, {"m_budget", 40}});
    const auto report = run_estimate(ExperimentConfig::parse(cfg));
    write_estimate_outputs(report, dir.str());
    std::ifstream in(dir.str() + "/metrics.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line ==
          "estimator,trial,budget,min_fs,nl_nsw,nl_nsw_excluded,eps_abs,a1_violations,"
          "a2_rate,a2_logsum,a2_flagged,a3_rate,n_inv,eps_inv,mape,mse");
    int rows = 0, means = 0;
    while (std::getline(in, line)) {
        ++rows;
        if (line.find(",mean,") != std::string::npos) ++means;
    }
    CHECK(rows == 2 * (3 + 1));
    CHECK(means == 2);
}

TEST_CASE("sweep emits one row per axis value, estimator and trial") {
    TempDir dir("shapfair_sweep");
    json cfg = minimal_config();
    cfg["trials"] = 2;
    cfg["sweep"] = {{"axis", "budget"}, {"values", {20, 40}}};
    run_sweep(ExperimentConfig::parse(cfg), dir.str());
    std::ifstream in(dir.str() + "/sweep.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "axis,value,estimator,trial,min_fs,a2_rate,deviation_logsum,mape,mse,nl_nsw");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 2 * 1 * 2);
}

TEST_CASE("alpha sweep emits every variant") {
    TempDir dir("shapfair_alpha");
    json cfg = minimal_config();
    cfg["trials"] = 1;
    cfg["sweep"] = {{"axis", "alpha"}, {"values", {0, 2, 5, 100}}};
    run_sweep(ExperimentConfig::parse(cfg), dir.str());
    std::ifstream in(dir.str() + "/sweep.csv");
    std::string line;
    std::getline(in, line);
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 4);
}

TEST_CASE("epsilon1 sweep: A2 violation rate never increases in epsilon1") {
    TempDir dir("shapfair_eps");
    json cfg = minimal_config();
    cfg["game"] = {{"builtin", "duplicated"},
                   {"base", {{"builtin", "glove"}, {"left", {0, 1}}, {"right", {2}}}}};
    cfg["trials"] = 5;
    cfg["estimators"] = {{{"kind", "mc"}, {"m_bootstrap", 3}, {"m_budget", 30}}};
    cfg["sweep"] = {{"axis", "epsilon1"}, {"values", {0.125, 0.5, 2.0}}};
    run_sweep(ExperimentConfig::parse(cfg), dir.str());
    std::ifstream in(dir.str() + "/sweep.csv");
    std::string line;
    std::getline(in, line);
    // Column 6 is a2_rate; average it per axis value.
    std::vector<double> sums(3, 0.0);
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        const double value = std::stod(cells[1]);
        const double rate = std::stod(cells[5]);
        const int slot = value == 0.125 ? 0 : value == 0.5 ? 1 : 2;
        sums[slot] += rate;
    }
    CHECK(sums[0] >= sums[1]);
    CHECK(sums[1] >= sums[2]);
}

TEST_CASE("phi reference file round trip") {
    TempDir dir("shapfair_phi");
    const std::string path = dir.str() + "/phi.json";
    save_phi_file({0.25, 0.5, 0.25}, path);
    const auto phi = load_phi_file(path, 3);
    CHECK(phi == std::vector<double>{0.25, 0.5, 0.25});
    CHECK_THROWS_AS(load_phi_file(path, 4), format_error);
}

TEST_CASE("estimation with a file reference") {
    TempDir dir("shapfair_ref");
    const std::string path = dir.str() + "/phi.json";
    save_phi_file({1.0 / 6, 1.0 / 6, 2.0 / 3}, path);
    json cfg = minimal_config();
    cfg["reference"] = {{"file", path}};
    const auto report = run_estimate(ExperimentConfig::parse(cfg));
    CHECK(report.phi_ref[2] == doctest::Approx(2.0 / 3));
}

TEST_CASE("cli exit codes") {
    TempDir dir("shapfair_cli");
    SUBCASE("success") {
        CHECK(run_cli("exact --builtin glove --left 0,1 --right 2") == 0);
        CHECK(run_cli("exact --builtin additive --weights 1,2,3") == 0);
    }
    SUBCASE("config errors exit 2") {
        CHECK(run_cli("exact") == 2);
        CHECK(run_cli("nonsense") == 2);
        const std::string bad = dir.str() + "/bad.json";
        std::ofstream(bad) << R"({"game": {"builtin": "alien"}, "estimators": []})";
        CHECK(run_cli("estimate --config " + bad) == 2);
    }
    SUBCASE("capacity errors exit 3") {
        CHECK(run_cli("exact --builtin majority --n 12") == 3);
    }
    SUBCASE("external utility errors exit 4") {
        const std::string cfg_path = dir.str() + "/sub.json";
        json cfg = minimal_config();
        cfg["game"] = {{"subprocess", {{"command", "false"}, {"n", 3}}}};
        cfg["reference"] = {{"file", dir.str() + "/phi.json"}};
        save_phi_file({0.1, 0.1, 0.8}, dir.str() + "/phi.json");
        std::ofstream(cfg_path) << cfg.dump();
        CHECK(run_cli("estimate --config " + cfg_path + " --out " + dir.str()) == 4);
    }
    SUBCASE("estimate writes its outputs") {
        const std::string cfg_path = dir.str() + "/ok.json";
        std::ofstream(cfg_path) << minimal_config().dump();
        CHECK(run_cli("estimate --config " + cfg_path + " --out " + dir.str()) == 0);
        CHECK(std::filesystem::exists(dir.path / "report.json"));
        CHECK(std::filesystem::exists(dir.path / "metrics.csv"));
    }
}

TEST_CASE("cli exact prints the Shapley vector") {
    TempDir dir("shapfair_cli_out");
    const std::string out = dir.str() + "/exact.json";
    const std::string cmd = std::string(SHAPFAIR_CLI_PATH) +
                            " exact --builtin glove --left 0,1 --right 2 > " + out;
    REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
    const json doc = load_json_file(out);
    CHECK(doc["format"] == "shapfair-exact-v1");
    CHECK(doc["phi"][2].get<double>() == doctest::Approx(2.0 / 3).epsilon(1e-12));
    CHECK(doc["phi_subsets"][0].get<double>() == doctest::Approx(1.0 / 6).epsilon(1e-12));
}

TEST_CASE("cli exact echoes an additive game table") {
    TempDir dir("shapfair_cli_table");
    const std::string table = dir.str() + "/g.json";
    save_table(build_game(json{{"builtin", "additive"}, {"weights", {1.0, 2.0, 3.0}}}),
               table);
    const std::string out = dir.str() + "/exact.json";
    const std::string cmd =
        std::string(SHAPFAIR_CLI_PATH) + " exact --table " + table + " > " + out;
    REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
    const json doc = load_json_file(out);
    CHECK(doc["phi"][0].get<double>() == 1.0);
    CHECK(doc["phi"][1].get<double>() == 2.0);
    CHECK(doc["phi"][2].get<double>() == 3.0);
}

TEST_CASE("cli sweep and verify round trip") {
    TempDir dir("shapfair_cli_sweep");
    json cfg = minimal_config();
    cfg["trials"] = 2;
    cfg["sweep"] = {{"axis", "budget"}, {"values", {20, 40}}};
    const std::string cfg_path = dir.str() + "/cfg.json";
    std::ofstream(cfg_path) << cfg.dump();
    CHECK(run_cli("sweep --config " + cfg_path + " --out " + dir.str()) == 0);
    CHECK(std::filesystem::exists(dir.path / "sweep.csv"));
    CHECK(run_cli("verify oracle") == 0);
    CHECK(run_cli("verify no_such_suite") == 2);
}

TEST_CASE("estimation over the utility line protocol end to end") {
    TempDir dir("shapfair_subproc_e2e");
    const std::string table = dir.str() + "/g.json";
    save_table(build_game(json{{"builtin", "glove"}, {"left", {0, 1}}, {"right", {2}}}),
               table);
    json cfg = minimal_config();
    cfg["game"] = {{"subprocess",
                    {{"command", std::string(UTILITY_CHILD_PATH) + " table " + table},
                     {"n", 3}}}};
    cfg["trials"] = 2;
    const auto report = run_estimate(ExperimentConfig::parse(cfg));
    CHECK(report.phi_ref[2] == doctest::Approx(2.0 / 3).epsilon(1e-12));
    CHECK(report.trials.size() == 2);
}

TEST_CASE("aggregate standard errors follow sample-std over sqrt(trials)") {
    TempDir dir("shapfair_agg");
    json cfg = minimal_config();
    cfg["trials"] = 4;
    const auto config = ExperimentConfig::parse(cfg);
    const auto report = run_estimate(config);
    write_estimate_outputs(report, dir.str());
    const json doc = load_json_file(dir.str() + "/report.json");
    std::vector<double> values;
    for (const auto& t : report.trials) values.push_back(t.min_fs);
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= values.size();
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double stderr_expected = std::sqrt(ss / (values.size() - 1) / values.size());
    const auto& cell = doc["aggregates"][0]["metrics"]["min_fs"];
    CHECK(cell["count"].get<int>() == 4);
    CHECK(cell["mean"].get<double>() == doctest::Approx(mean).epsilon(1e-12));
    CHECK(cell["stderr"].get<double>() == doctest::Approx(stderr_expected).epsilon(1e-12));
}

TEST_CASE("budget sweep: GAE mean min-FS is non-decreasing in the budget") {
    TempDir dir("shapfair_budget_sweep");
    const std::string table = dir.str() + "/hetero.json";
    save_table(heterogeneous_benchmark_game(), table);
    json cfg{{"game", {{"table", table}}},
             {"estimators",
              {{{"kind", "gae"}, {"label", "gae"}, {"m_bootstrap", 20}, {"alpha", 2.0}}}},
             {"epsilon1_grid", {0.5}},
             {"trials", 30},
             {"seed", 404},
             {"sweep", {{"axis", "budget"}, {"values", {500, 1000, 2000}}}}};
    run_sweep(ExperimentConfig::parse(cfg), dir.str());
    std::ifstream in(dir.str() + "/sweep.csv");
    std::string line;
    std::getline(in, line);
    std::map<double, std::pair<double, int>> by_budget;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        auto& [sum, count] = by_budget[std::stod(cells[1])];
        sum += std::stod(cells[4]);
        count += 1;
    }
    REQUIRE(by_budget.size() == 3);
    double last = -1.0;
    for (const auto& [budget, agg] : by_budget) {
        const double mean = agg.first / agg.second;
        CHECK(mean >= last);
        last = mean;
    }
}
