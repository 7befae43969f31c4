#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "geoswarm/harness.hpp"

namespace {

constexpr int kValidationFailure = 2;

} // namespace

int main(int argc, char** argv) {
    using namespace geoswarm;

    CLI::App app{"Grid swarm simulator for quality-scaled quorum site selection"};
    app.require_subcommand(1);

    std::string scenario_arg;
    std::uint64_t seed = 0;
    std::optional<std::uint64_t> rounds_cap;
    auto* run_cmd = app.add_subcommand("run", "Run one trial and print its CSV row");
    run_cmd->add_option("--scenario", scenario_arg, "Catalog name or scenario JSON file")->required();
    run_cmd->add_option("--seed", seed, "Trial seed");
    run_cmd->add_option("--rounds-cap", rounds_cap, "Override the scenario's round cap");

    std::size_t trials = 100;
    std::string out_dir;
    unsigned threads = 0;
    auto* exp_cmd = app.add_subcommand("experiment", "Run a batch of trials and write trials.csv/summary.json");
    exp_cmd->add_option("--scenario", scenario_arg, "Catalog name or scenario JSON file")->required();
    exp_cmd->add_option("--trials", trials, "Number of trials")->check(CLI::PositiveNumber);
    exp_cmd->add_option("--seed", seed, "Base seed; trial t uses seed + t");
    exp_cmd->add_option("--out", out_dir, "Output directory")->required();
    exp_cmd->add_option("--rounds-cap", rounds_cap, "Override the scenario's round cap");
    exp_cmd->add_option("--threads", threads, "Trial worker threads (0 = SIM_THREADS or auto)");

    std::string write_dir;
    auto* cat_cmd = app.add_subcommand("catalog", "List built-in scenarios");
    cat_cmd->add_option("--write", write_dir, "Also write each scenario as <dir>/<name>.json");

    std::string validate_path;
    auto* val_cmd = app.add_subcommand("validate", "Validate a scenario JSON file");
    val_cmd->add_option("file", validate_path, "Scenario file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            const ScenarioSpec scenario = resolve_scenario(scenario_arg);
            TrialOptions options;
            options.rounds_cap = rounds_cap;
            const TrialResult result = run_trial(scenario, seed, options);
            std::cout << trials_csv(scenario, {result});
        } else if (*exp_cmd) {
            ExperimentSpec spec{resolve_scenario(scenario_arg), trials, seed, {}};
            TrialOptions options;
            options.rounds_cap = rounds_cap;
            const ExperimentOutput out = run_experiment(spec, threads, options);
            write_outputs(out.trials, out.summary, spec.scenario, out_dir);
            std::cout << summary_json(out.summary, spec.scenario).dump(2) << "\n";
        } else if (*cat_cmd) {
            for (const ScenarioSpec& s : builtin_scenarios()) {
                std::cout << s.name << "\t" << s.family << "\t" << s.grid.n << "x" << s.grid.m
                          << "\tq=" << s.q_min << ".." << s.q_max << "\n";
                if (!write_dir.empty()) {
                    std::filesystem::create_directories(write_dir);
                    std::ofstream(std::filesystem::path(write_dir) / (s.name + ".json"))
                        << nlohmann::json(s).dump(2) << "\n";
                }
            }
        } else if (*val_cmd) {
            const ScenarioSpec s = load_scenario_file(validate_path);
            std::cout << validate_path << ": ok (" << s.sites.size() << " sites, " << s.agent_count
                      << " agents)\n";
        }
    } catch (const ModelError& e) {
        std::cerr << "error: " << e.what() << "\n";
        if (e.code() == ErrorCode::InvalidScenario) return kValidationFailure;
        return EXIT_FAILURE;
    }
    return EXIT_SUCCESS;
}
