#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "shapfair/estimators.hpp"
#include "shapfair/fairness.hpp"
#include "shapfair/game.hpp"

namespace shapfair {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kRngVersion = "xoshiro256++-1.0";

struct EstimatorSpec {
    std::string kind = "gae"; // mc | greedy | gae
    std::string label;        // unique per run; defaults to kind
    GaeConfig config;
};

struct SweepSpec {
    std::string axis; // budget | epsilon1 | alpha
    std::vector<double> values;
};

/// Parsed and validated experiment configuration. parse() collects every
/// invalid field into one config_error instead of stopping at the first.
struct ExperimentConfig {
    nlohmann::json game_spec;
    std::vector<EstimatorSpec> estimators;
    std::vector<double> epsilon1_grid{0.5};
    int trials = 1;
    std::uint64_t seed = 0;
    bool reference_exact = true;
    std::string reference_path;
    std::string output_dir = "out";
    int threads = 1;
    std::optional<SweepSpec> sweep;

    static ExperimentConfig parse(const nlohmann::json& doc);
    nlohmann::json echo() const;
};

/// Instantiate the game described by a game spec object.
CooperativeGame build_game(const nlohmann::json& game_spec);

/// Player count implied by a game spec, without launching subprocesses.
int player_count_of(const nlohmann::json& game_spec);

struct PerEpsilonMetrics {
    double epsilon1 = 0.0;
    long a1_violations = 0;
    std::optional<double> a2_rate;
    std::optional<double> a3_rate;
    double delta_independent = 0.0;
    double delta_dependent = 0.0;
    double delta_dependent_per_player = 0.0;
};

struct TrialMetrics {
    std::string estimator;
    int trial = 0;
    long budget = 0;
    double min_fs = 0.0;
    std::optional<double> nl_nsw_value;
    int nl_nsw_excluded = 0;
    std::optional<double> eps_abs;
    std::optional<double> a2_logsum;
    int a2_flagged = 0;
    long n_inv = 0;
    double eps_inv = 0.0;
    std::optional<double> mape;
    double mse = 0.0;
    std::vector<PerEpsilonMetrics> per_epsilon; // one entry per grid value
    EstimationResult estimation;
    FidelityReport fidelity;
    std::vector<PairDeviation> a2_pairs; // threshold details at the primary epsilon1
};

struct RunReport {
    ExperimentConfig config;
    std::vector<double> phi_ref;
    std::vector<std::pair<int, int>> symmetric_pairs;
    std::vector<std::pair<int, int>> desirable_pairs;
    std::vector<TrialMetrics> trials;
};

/// Run every (estimator, trial) cell. Deterministic for a fixed config and
/// seed; trials spread over a bounded worker pool.
RunReport run_estimate(const ExperimentConfig& config);

/// Write report.json, metrics.csv, axioms.csv and phi.csv under out_dir.
void write_estimate_outputs(const RunReport& report, const std::string& out_dir);

/// Run the configured sweep and write sweep.csv under out_dir.
void run_sweep(const ExperimentConfig& config, const std::string& out_dir);

nlohmann::json load_json_file(const std::string& path);

/// Reference SV vector in the shapfair-phi-v1 format.
std::vector<double> load_phi_file(const std::string& path, int expected_n);
void save_phi_file(const std::vector<double>& phi, const std::string& path);

/// Round-trip decimal formatting used for all CSV output.
std::string format_double(double v);

} // namespace shapfair
