#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "geoswarm/house_hunting.hpp"

namespace geoswarm {

void to_json(nlohmann::json& j, const ScenarioSpec& s);
/// Missing p_active/p_nest/t_beta/t_quorum are filled from the default
/// round-trip coupling. Throws ModelError(InvalidScenario) on bad input.
void from_json(const nlohmann::json& j, ScenarioSpec& s);

ScenarioSpec load_scenario_file(const std::filesystem::path& path);
/// Catalog name or path to a JSON file.
ScenarioSpec resolve_scenario(const std::string& name_or_path);

/// The full experiment grid: further-nest (2x/3x/9x with controls),
/// in-the-way vs out-of-way (2x..9x) and quality-difference families, each
/// with fixed (4,4) and scaled (4,7) quorum.
std::vector<ScenarioSpec> builtin_scenarios();
std::optional<ScenarioSpec> find_builtin(const std::string& name);

struct TrialResult {
    std::string label;
    std::uint64_t seed = 0;
    std::uint64_t rounds = 0;
    bool converged = false;
    /// Agents committed to candidate site i and located inside it, i = 1..N-1
    /// stored at index i-1.
    std::vector<int> site_counts;
    double accuracy = 0.0;
    std::optional<std::uint64_t> decision_time;
    bool split = false;

    friend bool operator==(const TrialResult&, const TrialResult&) = default;
};

struct ExperimentSpec {
    ScenarioSpec scenario;
    std::size_t trials = 1;
    std::uint64_t base_seed = 0;
    std::string label;
};

struct ExperimentSummary {
    std::string label;
    std::size_t trials = 0;
    double accuracy_mean = 0.0;
    double accuracy_stddev = 0.0;
    std::size_t converged = 0;
    std::optional<double> decision_time_mean;
    std::optional<double> decision_time_stddev;
    std::size_t split_count = 0;
    std::size_t non_converged = 0;
};

/// Metrics from a final configuration alone.
TrialResult measure(const ScenarioSpec& scenario, const HHConfiguration& final_config,
                    std::uint64_t rounds, bool converged);

struct TrialOptions {
    std::optional<std::uint64_t> rounds_cap;  // overrides scenario.max_rounds
    unsigned step_threads = 1;
};

TrialResult run_trial(const ScenarioSpec& scenario, std::uint64_t seed, const TrialOptions& options = {});

/// Worker count from SIM_THREADS (unset or 0 = hardware concurrency).
unsigned default_thread_count();

struct ExperimentOutput {
    std::vector<TrialResult> trials;
    ExperimentSummary summary;
};

/// Trial t uses seed base_seed + t; results are in trial order whatever the
/// thread count.
ExperimentOutput run_experiment(const ExperimentSpec& spec, unsigned threads = 0,
                                const TrialOptions& options = {});

ExperimentSummary summarize(const std::string& label, const std::vector<TrialResult>& trials);

std::string trials_csv_header(std::size_t candidate_sites);
std::string trials_csv_row(const ScenarioSpec& scenario, const TrialResult& trial);
std::string trials_csv(const ScenarioSpec& scenario, const std::vector<TrialResult>& trials);
/// Parses a trials.csv produced by trials_csv.
std::vector<TrialResult> parse_trials_csv(const std::string& text);

nlohmann::json summary_json(const ExperimentSummary& summary, const ScenarioSpec& scenario);

/// Writes <dir>/trials.csv and <dir>/summary.json.
void write_outputs(const std::vector<TrialResult>& trials, const ExperimentSummary& summary,
                   const ScenarioSpec& scenario, const std::filesystem::path& dir);

} // namespace geoswarm
