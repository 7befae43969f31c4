#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "geoswarm/configuration.hpp"
#include "geoswarm/engine.hpp"
#include "geoswarm/grid.hpp"
#include "geoswarm/rng.hpp"

namespace geoswarm {

/// Vertex state: index of the site containing the vertex, or kNoSite.
using SiteLabel = int;
inline constexpr SiteLabel kNoSite = -1;
inline constexpr int kHomeSite = 0;
inline constexpr std::size_t kMaxSites = 64;

struct SiteSpec {
    Vertex lower_left;
    Vertex upper_right;
    double quality = 0.0;

    bool contains(Vertex v) const noexcept {
        return v.x >= lower_left.x && v.x <= upper_right.x && v.y >= lower_left.y &&
               v.y <= upper_right.y;
    }
    /// Geometric centre, possibly between vertices.
    std::pair<double, double> center() const noexcept {
        return {(lower_left.x + upper_right.x) / 2.0, (lower_left.y + upper_right.y) / 2.0};
    }
    /// Vertex agents steer to when travelling to the site.
    Vertex center_vertex() const noexcept {
        return {(lower_left.x + upper_right.x) / 2, (lower_left.y + upper_right.y) / 2};
    }
    std::size_t area() const noexcept {
        return static_cast<std::size_t>(upper_right.x - lower_left.x + 1) *
               static_cast<std::size_t>(upper_right.y - lower_left.y + 1);
    }

    friend bool operator==(const SiteSpec&, const SiteSpec&) = default;
};

/// Everything needed to run one house-hunting trial. Site 0 is the home
/// nest; sites 1.. are candidates.
struct ScenarioSpec {
    std::string name;
    std::string family;
    double multiplier = 0.0;  // far/near distance ratio, 0 when not meaningful

    GridSpec grid;
    std::vector<SiteSpec> sites;
    std::size_t agent_count = 100;
    int influence_radius = 2;
    double p_active = 0.0;   // P_A
    double p_nest = 0.0;     // P_N
    double messaging = 1.0 / 15.0;  // D
    int q_min = 4;
    int q_max = 4;
    std::int64_t t_beta = 1;
    std::int64_t t_quorum = 1;
    double levy_exponent = 2.0;
    std::uint64_t max_rounds = 500'000;

    std::size_t candidate_count() const noexcept { return sites.empty() ? 0 : sites.size() - 1; }
    /// "fixed" when q_min == q_max, otherwise "scaled".
    std::string quorum_mode() const { return q_min == q_max ? "fixed" : "scaled"; }

    /// Throws ModelError(InvalidScenario) on any violated invariant.
    void validate() const;

    friend bool operator==(const ScenarioSpec&, const ScenarioSpec&) = default;
};

enum class Preference : std::uint8_t { Uncommitted, Favoring, Committed };
enum class Activity : std::uint8_t { Nest, Active };

struct CoreState {
    Preference preference = Preference::Uncommitted;
    Activity activity = Activity::Nest;
    int site = kNoSite;  // required iff preference != Uncommitted

    friend bool operator==(const CoreState&, const CoreState&) = default;
};

std::string to_string(const CoreState& core);

struct LevyWalkState {
    double heading = 0.0;     // radians
    int remaining = 0;        // grid steps left on the current leg
    double residual_x = 0.0;  // line-stepping error accumulators
    double residual_y = 0.0;
    double exponent = 2.0;

    friend bool operator==(const LevyWalkState&, const LevyWalkState&) = default;
};

enum class Mission : std::uint8_t {
    None,
    Exploring,
    ReturningHome,
    TravelingToSite,
    EvaluatingSite,
    WaitingInSite,
    WanderingCommitted,
    ReturningToCommitted,
};

struct PendingEvaluation {
    int current_site = kNoSite;
    int candidate_site = kNoSite;

    friend bool operator==(const PendingEvaluation&, const PendingEvaluation&) = default;
};

struct AgentAux {
    LevyWalkState walk;
    std::optional<Vertex> destination;
    Mission mission = Mission::None;
    int mission_site = kNoSite;  // site for TravelingToSite/EvaluatingSite/WaitingInSite
    std::int64_t lonely_timer = 0;
    std::optional<std::int64_t> quorum_timer;  // set iff Committed
    std::optional<PendingEvaluation> pending_evaluation;
    std::uint64_t sites_in_view = 0;  // bit i: site i was inside the sensing box last round

    friend bool operator==(const AgentAux&, const AgentAux&) = default;
};

struct HHAgentState {
    CoreState core;
    AgentAux aux;

    friend bool operator==(const HHAgentState&, const HHAgentState&) = default;
};

using HHConfiguration = GlobalConfiguration<SiteLabel, HHAgentState>;
using HHView = NeighborhoodView<SiteLabel, HHAgentState>;
using HHContext = TransitionContext<SiteLabel, HHAgentState>;
using HHProposal = AgentProposal<SiteLabel, HHAgentState>;

/// floor((q_min - q_max) * quality + q_max), always within [q_min, q_max].
int quorum_threshold(int q_min, int q_max, double quality);

/// Inverse of the mean home-to-site round trip in rounds (one vertex per
/// round), capped at 1. Distances below one vertex count as one.
double round_trip_rate(const ScenarioSpec& scenario);

/// Copy of scenario with P_N = 9 P_A = L, t_beta = 5/L and t_Q = 1/L.
ScenarioSpec with_default_rates(ScenarioSpec scenario);

/// Vertex labelling plus i.i.d. uniform placement of every agent in the home
/// nest, all starting Uncommitted/Nest.
HHConfiguration build_initial_configuration(const ScenarioSpec& scenario, const RngPolicy& rng);

/// Agents other than observer located inside site and inside the box.
int count_visible_in_site(const HHView& view, AgentId observer, const SiteSpec& site);

/// Favoring agents (either activity) in the box grouped by favoured site,
/// excluding site `favored` and the observer.
std::map<int, int> count_favoring_rivals(const HHView& view, AgentId observer, int favored);

/// Truncated power law on [1, max_length] with density ~ l^-exponent,
/// sampled by inversion of u in [0, 1).
double levy_length(double u, double exponent, double max_length);

/// One grid step of a Levy flight. A new leg (heading, length) is drawn when
/// the previous one is used up; the heading is redrawn at bounded walls.
std::pair<Direction, LevyWalkState> levy_step(const LevyWalkState& walk, RngStream& rng,
                                              const GridSpec& grid, Vertex location);

/// Next axis step toward target: the axis with the larger remaining
/// distance, horizontal on ties; S once there.
Direction navigate_toward(Vertex location, Vertex target);

/// Uniform choice among the moves (including S) that keep the agent inside
/// the rectangle. Steers toward the rectangle when outside it.
Direction random_walk_within(const SiteSpec& area, const GridSpec& grid, Vertex location,
                             RngStream& rng);

/// True if from -> to is a self-transition or an edge of the six-state
/// machine (used to audit long runs).
bool is_allowed_transition(const CoreState& from, const CoreState& to);

/// The agent transition function for the house-hunting problem. Stateless
/// apart from the scenario, so one instance may be shared across threads.
class HouseHuntingModel {
public:
    explicit HouseHuntingModel(ScenarioSpec scenario);

    HHProposal operator()(const HHContext& ctx) const;

    const ScenarioSpec& scenario() const noexcept { return scenario_; }
    int quorum_for(int site) const { return quorum_[static_cast<std::size_t>(site)]; }
    double active_fraction() const noexcept { return active_fraction_; }

    StepOptions step_options(unsigned threads = 1) const {
        return {scenario_.influence_radius, threads};
    }

private:
    void validate_state(const HHAgentState& state) const;
    void commit(HHAgentState& state, int site, RngStream& rng) const;
    Direction move(HHAgentState& state, const HHContext& ctx) const;

    ScenarioSpec scenario_;
    std::vector<int> quorum_;
    double active_fraction_ = 0.0;
};

/// Every agent Committed, quorum_timer >= t_Q, and inside its committed site.
bool is_settled(const ScenarioSpec& scenario, const HHConfiguration& config);

} // namespace geoswarm
