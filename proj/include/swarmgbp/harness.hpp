#pragma once

// Experiment configuration, trial runner, sweeps and the seed-robot study.
// Configs are flat JSON objects; every key can also be set from the command
// line as key=value.

#include "swarmgbp/sim.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace swarmgbp::harness {

using nlohmann::json;

/// Raised for anything wrong with a configuration, before any simulation.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ExperimentMode { Formation, Exploration, Discrete };

struct SwarmConfig {
    ExperimentMode mode = ExperimentMode::Exploration;
    /// Unset for formation means one robot per formation point.
    std::optional<std::size_t> n_robots;
    double world_size = 100.0;
    std::optional<double> r_C;
    double dt = 0.1;
    int N_I = 2;

    int W = 3;
    int T_S = 1;
    std::optional<std::vector<double>> sigma_p;
    std::optional<std::vector<double>> sigma_c;
    /// Unset: ten times the mode's default consensus strength over sigma_p.
    std::optional<double> sigma_t_scale;
    std::string attach = "window";

    int H = 6;
    double T_H = 1.5;
    double sigma_d = 0.1;
    double sigma_u = 0.001;
    double sigma_r = 0.01;
    double sigma_current = 1e-6;
    double sigma_horizon = 0.1;
    double collision_damping = 0.25;
    double v_max = 2.0;
    double omega_max = 1.0;
    double d_min = 2.0;
    std::string unicycle_form = "corrected";
    double goal_radius = 2.0;
    double min_start_separation = 4.0;

    std::string shape = "shapes/A.txt";
    double r_N = 2.0;
    double r_S = 4.0;
    double r_R = 1.0;
    double tau_0 = 1e3;
    bool occupancy_weighting = true;

    int N_D = 4;
    double zeta = 0.0;
    int seed_decision = 0;
    double grid_spacing = 5.5;
    double grid_jitter = 0.24;

    std::optional<int> T_max;
    int trials = 1;
    std::uint64_t seed = 1;
    bool parallel = true;
    /// Write trace_trialK.csv files.
    bool trace = true;

    /// Throws ConfigError for unknown keys or values of the wrong type.
    void set(const std::string& key, const json& value);
    /// "key=value"; the value is read as JSON when it parses, else as a string.
    void set_assignment(const std::string& assignment);
    void merge(const json& object);

    /// Every key with its effective value.
    json to_json() const;
    /// Effective values for the optional fields.
    double effective_r_C() const;
    int effective_T_max() const;
    std::vector<double> effective_sigma_p() const;
    std::vector<double> effective_sigma_c() const;
    double effective_sigma_t_scale() const;

    /// Throws ConfigError; loads and checks the shape in formation mode.
    sim::SimConfig to_sim() const;
};

/// Keys accepted by SwarmConfig::set.
std::vector<std::string> config_keys();
/// Keys that take a single number, i.e. valid sweep axes.
std::vector<std::string> sweep_axes();

/// Reads a JSON object from `path` (relative shape paths resolve against the
/// config's directory first) and then applies `assignments`.
SwarmConfig load_config(const std::optional<std::filesystem::path>& path, const std::vector<std::string>& assignments);

struct TrialResult {
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    bool converged = false;
    /// Timesteps to convergence, or T_max when the trial did not converge.
    int iterations = 0;
    double min_distance = 0.0;
    std::uint64_t singular_messages = 0;
};

struct ExperimentResult {
    std::vector<TrialResult> trials;
    double convergence_rate = 0.0;
    /// Median over converged trials; nullopt when none converged.
    std::optional<double> median_iterations;
    double wall_time_s = 0.0;
};

/// Per-trial seed stream derived from the master seed.
std::uint64_t trial_seed(std::uint64_t master, std::size_t trial);

/// One trial. Rows go to `trace` when given.
TrialResult run_trial(const SwarmConfig& cfg, std::size_t trial, std::ostream* trace);

/// Runs cfg.trials trials; writes trace_trialK.csv and summary.json into
/// `out` when given.
ExperimentResult run_experiment(const SwarmConfig& cfg, const std::optional<std::filesystem::path>& out);

json summary_json(const SwarmConfig& cfg, const ExperimentResult& r);

struct SweepRow {
    double value = 0.0;
    TrialResult result;
};

/// One experiment per value of `axis`; writes sweep.csv and summary.json into
/// `out` when given. Throws ConfigError for an unknown axis.
std::vector<SweepRow> sweep(const SwarmConfig& base, const std::string& axis, const std::vector<double>& values,
                            const std::optional<std::filesystem::path>& out);

struct SeedRow {
    double zeta = 0.0;
    std::size_t trials = 0;
    std::size_t converged = 0;
    double percent = 0.0;
};

/// Table I zeta values.
std::vector<double> table_zetas();

/// Percentage of trials in which every robot exhibits the seed decision
/// within T_max, per zeta. Discrete mode only.
std::vector<SeedRow> seed_robot_study(const SwarmConfig& base, const std::vector<double>& zetas,
                                      const std::optional<std::filesystem::path>& out);

/// Column names of the trace CSV.
const std::vector<std::string>& trace_columns();

} // namespace swarmgbp::harness
