#include "geoswarm/harness.hpp"

#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

namespace geoswarm {

using nlohmann::json;

TrialResult measure(const ScenarioSpec& scenario, const HHConfiguration& final_config,
                    std::uint64_t rounds, bool converged) {
    TrialResult result;
    result.rounds = rounds;
    result.converged = converged;
    result.site_counts.assign(scenario.candidate_count(), 0);

    std::set<int> committed_sites;
    for (AgentId r = 0; r < final_config.agent_count(); ++r) {
        const CoreState& core = final_config.srmap[r].core;
        if (core.preference != Preference::Committed) continue;
        committed_sites.insert(core.site);
        if (scenario.sites[static_cast<std::size_t>(core.site)].contains(final_config.locmap[r])) {
            ++result.site_counts[static_cast<std::size_t>(core.site - 1)];
        }
    }
    result.split = committed_sites.size() >= 2;

    // Ties for best quality all count as correct.
    double best = -1.0;
    for (std::size_t i = 1; i < scenario.sites.size(); ++i) best = std::max(best, scenario.sites[i].quality);
    int correct = 0;
    for (std::size_t i = 1; i < scenario.sites.size(); ++i) {
        if (scenario.sites[i].quality == best) correct += result.site_counts[i - 1];
    }
    const std::size_t agents = final_config.agent_count();
    result.accuracy = agents == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(agents);
    if (converged) result.decision_time = rounds;
    return result;
}

TrialResult run_trial(const ScenarioSpec& scenario, std::uint64_t seed, const TrialOptions& options) {
    const HouseHuntingModel model(scenario);
    const RngPolicy rng{seed};
    auto stop = [&](const HHConfiguration& c, std::uint64_t) { return is_settled(scenario, c); };
    auto outcome = run(scenario.grid, build_initial_configuration(scenario, rng), model, rng, stop,
                       options.rounds_cap.value_or(scenario.max_rounds),
                       model.step_options(options.step_threads));
    TrialResult result = measure(scenario, outcome.configuration, outcome.rounds,
                                 outcome.reason == StopReason::Converged);
    result.label = scenario.name;
    result.seed = seed;
    return result;
}

unsigned default_thread_count() {
    unsigned requested = 0;
    if (const char* env = std::getenv("SIM_THREADS")) requested = static_cast<unsigned>(std::strtoul(env, nullptr, 10));
    if (requested == 0) requested = std::max(1u, std::thread::hardware_concurrency());
    return requested;
}

ExperimentOutput run_experiment(const ExperimentSpec& spec, unsigned threads,
                                const TrialOptions& options) {
    ScenarioSpec scenario = spec.scenario;
    if (!spec.label.empty()) scenario.name = spec.label;
    scenario.validate();

    ExperimentOutput out;
    out.trials.resize(spec.trials);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t t = next++; t < spec.trials; t = next++) {
            out.trials[t] = run_trial(scenario, spec.base_seed + t, options);
        }
    };
    const unsigned workers =
        std::min<unsigned>(threads == 0 ? default_thread_count() : threads,
                           static_cast<unsigned>(std::max<std::size_t>(1, spec.trials)));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    out.summary = summarize(scenario.name, out.trials);
    return out;
}

namespace {

std::pair<double, double> mean_stddev(const std::vector<double>& xs) {
    if (xs.empty()) return {0.0, 0.0};
    double sum = 0.0;
    for (double x : xs) sum += x;
    const double mean = sum / static_cast<double>(xs.size());
    if (xs.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

ExperimentSummary summarize(const std::string& label, const std::vector<TrialResult>& trials) {
    ExperimentSummary s;
    s.label = label;
    s.trials = trials.size();
    std::vector<double> accuracy;
    std::vector<double> times;
    for (const TrialResult& t : trials) {
        accuracy.push_back(t.accuracy);
        if (t.converged && t.decision_time) times.push_back(static_cast<double>(*t.decision_time));
        if (t.split) ++s.split_count;
        if (!t.converged) ++s.non_converged;
    }
    std::tie(s.accuracy_mean, s.accuracy_stddev) = mean_stddev(accuracy);
    s.converged = times.size();
    if (!times.empty()) {
        const auto [mean, stddev] = mean_stddev(times);
        s.decision_time_mean = mean;
        s.decision_time_stddev = stddev;
    }
    return s;
}

std::string trials_csv_header(std::size_t candidate_sites) {
    std::string header =
        "label,family,multiplier,quorum,seed,converged,rounds,accuracy,decision_time,split";
    for (std::size_t i = 1; i <= candidate_sites; ++i) header += ",site_" + std::to_string(i);
    return header;
}

std::string trials_csv_row(const ScenarioSpec& scenario, const TrialResult& trial) {
    std::ostringstream os;
    os << trial.label << ',' << scenario.family << ',' << format_double(scenario.multiplier) << ','
       << scenario.quorum_mode() << ',' << trial.seed << ',' << (trial.converged ? 1 : 0) << ','
       << trial.rounds << ',' << format_double(trial.accuracy) << ',';
    if (trial.decision_time) os << *trial.decision_time;
    os << ',' << (trial.split ? 1 : 0);
    for (int count : trial.site_counts) os << ',' << count;
    return os.str();
}

std::string trials_csv(const ScenarioSpec& scenario, const std::vector<TrialResult>& trials) {
    std::string out = trials_csv_header(scenario.candidate_count()) + "\n";
    for (const TrialResult& t : trials) out += trials_csv_row(scenario, t) + "\n";
    return out;
}

std::vector<TrialResult> parse_trials_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<TrialResult> out;
    if (!std::getline(in, line)) return out;
    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ss(s);
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!s.empty() && s.back() == ',') cells.emplace_back();
        return cells;
    };
    const std::size_t columns = split(line).size();
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != columns || columns < 10) {
            throw ModelError(ErrorCode::Io, "malformed trials.csv row: " + line);
        }
        TrialResult t;
        t.label = cells[0];
        t.seed = std::stoull(cells[4]);
        t.converged = cells[5] == "1";
        t.rounds = std::stoull(cells[6]);
        t.accuracy = std::stod(cells[7]);
        if (!cells[8].empty()) t.decision_time = std::stoull(cells[8]);
        t.split = cells[9] == "1";
        for (std::size_t c = 10; c < cells.size(); ++c) t.site_counts.push_back(std::stoi(cells[c]));
        out.push_back(std::move(t));
    }
    return out;
}

json summary_json(const ExperimentSummary& s, const ScenarioSpec& scenario) {
    json j;
    j["label"] = s.label;
    j["trials"] = s.trials;
    j["accuracy"] = {{"mean", s.accuracy_mean}, {"stddev", s.accuracy_stddev}};
    json dt;
    dt["count"] = s.converged;
    dt["mean"] = s.decision_time_mean ? json(*s.decision_time_mean) : json(nullptr);
    dt["stddev"] = s.decision_time_stddev ? json(*s.decision_time_stddev) : json(nullptr);
    j["decision_time"] = dt;
    j["split_count"] = s.split_count;
    j["non_converged"] = s.non_converged;
    j["scenario"] = scenario;
    return j;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ModelError(ErrorCode::Io, "cannot open " + path.string() + " for writing");
    out << content;
    out.close();
    if (!out) throw ModelError(ErrorCode::Io, "failed writing " + path.string());
}

} // namespace

void write_outputs(const std::vector<TrialResult>& trials, const ExperimentSummary& summary,
                   const ScenarioSpec& scenario, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ModelError(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
    write_file(dir / "trials.csv", trials_csv(scenario, trials));
    write_file(dir / "summary.json", summary_json(summary, scenario).dump(2) + "\n");
}

} // namespace geoswarm
