#include "geoswarm/house_hunting.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace geoswarm {

namespace {

void fail(const std::string& what) { throw ModelError(ErrorCode::InvalidScenario, what); }

bool overlaps(const SiteSpec& a, const SiteSpec& b) {
    return a.lower_left.x <= b.upper_right.x && b.lower_left.x <= a.upper_right.x &&
           a.lower_left.y <= b.upper_right.y && b.lower_left.y <= a.upper_right.y;
}

int sign(int v) { return (v > 0) - (v < 0); }

} // namespace

void ScenarioSpec::validate() const {
    grid.validate();
    if (sites.empty()) fail("home nest (site 0) missing");
    if (sites.size() > kMaxSites) fail("at most 64 sites are supported");
    for (std::size_t i = 0; i < sites.size(); ++i) {
        const SiteSpec& s = sites[i];
        if (s.lower_left.x > s.upper_right.x || s.lower_left.y > s.upper_right.y) {
            fail("site " + std::to_string(i) + " has inverted corners");
        }
        if (!grid.contains(s.lower_left) || !grid.contains(s.upper_right)) {
            fail("site " + std::to_string(i) + " lies outside the grid");
        }
        if (!(s.quality >= 0.0 && s.quality <= 1.0)) {
            fail("site " + std::to_string(i) + " quality outside [0,1]");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (overlaps(s, sites[j])) {
                fail("sites " + std::to_string(j) + " and " + std::to_string(i) + " overlap");
            }
        }
    }
    if (!(p_active > 0.0 && p_active <= 1.0)) fail("P_A must lie in (0,1]");
    if (!(p_nest > 0.0 && p_nest <= 1.0)) fail("P_N must lie in (0,1]");
    if (!(messaging >= 0.0 && messaging <= 1.0)) fail("messaging probability must lie in [0,1]");
    if (q_min < 1 || q_min > q_max) fail("need 1 <= q_min <= q_max");
    if (t_beta < 1 || t_quorum < 1) fail("t_beta and t_quorum must be >= 1");
    if (influence_radius < 0) fail("influence radius must be non-negative");
    if (!(levy_exponent > 1.0)) fail("levy exponent must exceed 1");
}

std::string to_string(const CoreState& core) {
    std::ostringstream os;
    switch (core.preference) {
    case Preference::Uncommitted: os << 'U'; break;
    case Preference::Favoring: os << 'F'; break;
    case Preference::Committed: os << 'C'; break;
    }
    os << (core.activity == Activity::Nest ? 'N' : 'A');
    if (core.site != kNoSite) os << '_' << core.site;
    return os.str();
}

int quorum_threshold(int q_min, int q_max, double quality) {
    const double q = std::floor(static_cast<double>(q_min - q_max) * quality + q_max);
    return std::clamp(static_cast<int>(q), q_min, q_max);
}

double round_trip_rate(const ScenarioSpec& scenario) {
    if (scenario.candidate_count() == 0) {
        throw ModelError(ErrorCode::NoCandidateSites, "round trip rate needs a candidate site");
    }
    const auto [hx, hy] = scenario.sites[kHomeSite].center();
    double total = 0.0;
    for (std::size_t i = 1; i < scenario.sites.size(); ++i) {
        const auto [sx, sy] = scenario.sites[i].center();
        total += std::max(1.0, std::hypot(sx - hx, sy - hy));
    }
    const double mean = total / static_cast<double>(scenario.candidate_count());
    return std::min(1.0, 1.0 / (2.0 * mean));
}

ScenarioSpec with_default_rates(ScenarioSpec scenario) {
    const double rate = round_trip_rate(scenario);
    scenario.p_nest = rate;
    scenario.p_active = rate / 9.0;
    scenario.t_beta = std::max<std::int64_t>(1, std::llround(5.0 / rate));
    scenario.t_quorum = std::max<std::int64_t>(1, std::llround(1.0 / rate));
    return scenario;
}

HHConfiguration build_initial_configuration(const ScenarioSpec& scenario, const RngPolicy& rng) {
    scenario.validate();
    const GridSpec& grid = scenario.grid;
    HHConfiguration config;
    config.svmap.assign(grid.vertex_count(), kNoSite);
    for (std::size_t i = 0; i < scenario.sites.size(); ++i) {
        const SiteSpec& s = scenario.sites[i];
        for (int y = s.lower_left.y; y <= s.upper_right.y; ++y) {
            for (int x = s.lower_left.x; x <= s.upper_right.x; ++x) {
                config.svmap[grid.index({x, y})] = static_cast<SiteLabel>(i);
            }
        }
    }
    const SiteSpec& home = scenario.sites[kHomeSite];
    const int width = home.upper_right.x - home.lower_left.x + 1;
    RngStream placement = rng.auxiliary(0);
    config.srmap.resize(scenario.agent_count);
    config.locmap.reserve(scenario.agent_count);
    for (std::size_t r = 0; r < scenario.agent_count; ++r) {
        const auto k = static_cast<int>(placement.below(home.area()));
        config.locmap.push_back({home.lower_left.x + k % width, home.lower_left.y + k / width});
        config.srmap[r].aux.walk.exponent = scenario.levy_exponent;
    }
    return config;
}

int count_visible_in_site(const HHView& view, AgentId observer, const SiteSpec& site) {
    int count = 0;
    view.for_each_agent([&](AgentId r, Vertex w) {
        if (r != observer && site.contains(w)) ++count;
    });
    return count;
}

std::map<int, int> count_favoring_rivals(const HHView& view, AgentId observer, int favored) {
    std::map<int, int> rivals;
    view.for_each_agent([&](AgentId r, Vertex) {
        if (r == observer) return;
        const CoreState& core = view.agent_state(r).core;
        if (core.preference == Preference::Favoring && core.site != favored) ++rivals[core.site];
    });
    return rivals;
}

double levy_length(double u, double exponent, double max_length) {
    if (max_length <= 1.0) return 1.0;
    const double k = 1.0 - exponent;
    const double tail = std::pow(max_length, k);
    return std::pow(1.0 - u * (1.0 - tail), 1.0 / k);
}

std::pair<Direction, LevyWalkState> levy_step(const LevyWalkState& walk, RngStream& rng,
                                              const GridSpec& grid, Vertex location) {
    LevyWalkState next = walk;
    const double max_length = std::max(grid.n, grid.m);
    auto new_heading = [&] {
        next.heading = rng.uniform() * 2.0 * std::numbers::pi;
        next.residual_x = 0.0;
        next.residual_y = 0.0;
    };
    if (next.remaining <= 0) {
        new_heading();
        const double length = levy_length(rng.uniform(), next.exponent, max_length);
        next.remaining = std::max(1, static_cast<int>(std::floor(length)));
    }
    for (int attempt = 0; attempt < 64; ++attempt) {
        // Unit L1 increment keeps the residual bounded for any heading.
        const double cx = std::cos(next.heading);
        const double cy = std::sin(next.heading);
        const double norm = std::abs(cx) + std::abs(cy);
        const double rx = next.residual_x + cx / norm;
        const double ry = next.residual_y + cy / norm;
        Direction d;
        if (std::abs(rx) >= std::abs(ry)) {
            d = rx >= 0.0 ? Direction::R : Direction::L;
        } else {
            d = ry >= 0.0 ? Direction::U : Direction::D;
        }
        if (is_applicable(grid, location, d)) {
            const Vertex delta = step_delta(d);
            next.residual_x = rx - delta.x;
            next.residual_y = ry - delta.y;
            --next.remaining;
            return {d, next};
        }
        new_heading();
    }
    return {Direction::S, next};
}

Direction navigate_toward(Vertex location, Vertex target) {
    const int dx = target.x - location.x;
    const int dy = target.y - location.y;
    if (dx == 0 && dy == 0) return Direction::S;
    if (std::abs(dx) >= std::abs(dy)) return sign(dx) > 0 ? Direction::R : Direction::L;
    return sign(dy) > 0 ? Direction::U : Direction::D;
}

Direction random_walk_within(const SiteSpec& area, const GridSpec& grid, Vertex location,
                             RngStream& rng) {
    if (!area.contains(location)) return navigate_toward(location, area.center_vertex());
    std::array<Direction, 5> options{};
    std::size_t count = 0;
    for (Direction d : kAllDirections) {
        if (!is_applicable(grid, location, d)) continue;
        if (area.contains(apply_direction(grid, location, d))) options[count++] = d;
    }
    return options[rng.below(count)];
}

bool is_allowed_transition(const CoreState& from, const CoreState& to) {
    if (from == to) return true;
    using P = Preference;
    using A = Activity;
    if (from.preference == P::Committed) return false;
    if (to.preference == P::Committed) return true;
    switch (from.preference) {
    case P::Uncommitted:
        if (to.preference == P::Uncommitted) return from.activity != to.activity;
        // Discovery only happens while exploring.
        return from.activity == A::Active && to.preference == P::Favoring;
    case P::Favoring:
        if (to.preference == P::Uncommitted) {
            return from.activity == A::Nest && to.activity == A::Active;
        }
        if (to.site == from.site) return from.activity != to.activity;
        return from.activity == A::Nest && to.activity == A::Nest;
    case P::Committed: break;
    }
    return false;
}

HouseHuntingModel::HouseHuntingModel(ScenarioSpec scenario) : scenario_(std::move(scenario)) {
    scenario_.validate();
    quorum_.reserve(scenario_.sites.size());
    for (const SiteSpec& s : scenario_.sites) {
        quorum_.push_back(quorum_threshold(scenario_.q_min, scenario_.q_max, s.quality));
    }
    active_fraction_ = scenario_.p_active / (scenario_.p_active + scenario_.p_nest);
}

void HouseHuntingModel::validate_state(const HHAgentState& state) const {
    const CoreState& core = state.core;
    const bool needs_site = core.preference != Preference::Uncommitted;
    const bool has_site = core.site != kNoSite;
    if (needs_site != has_site) {
        throw ModelError(ErrorCode::InvalidAgentState, "site must be set iff agent is not Uncommitted");
    }
    if (has_site && (core.site < 1 || static_cast<std::size_t>(core.site) >= scenario_.sites.size())) {
        throw ModelError(ErrorCode::InvalidAgentState,
                         "agent refers to unknown candidate site " + std::to_string(core.site));
    }
    if ((core.preference == Preference::Committed) != state.aux.quorum_timer.has_value()) {
        throw ModelError(ErrorCode::InvalidAgentState, "quorum timer must be set iff Committed");
    }
}

void HouseHuntingModel::commit(HHAgentState& state, int site, RngStream& rng) const {
    const bool active = rng.bernoulli(0.5);
    state.core = {Preference::Committed, active ? Activity::Active : Activity::Nest, site};
    state.aux.quorum_timer = 0;
    state.aux.lonely_timer = 0;
    state.aux.pending_evaluation.reset();
    state.aux.destination.reset();
    state.aux.walk.remaining = 0;
    state.aux.mission = active ? Mission::WanderingCommitted : Mission::ReturningHome;
    state.aux.mission_site = active ? kNoSite : kHomeSite;
}

namespace {

void set_mission(HHAgentState& s, Mission mission, int site) {
    s.aux.mission = mission;
    s.aux.mission_site = site;
    s.aux.destination.reset();
    if (mission == Mission::Exploring || mission == Mission::WanderingCommitted) {
        s.aux.walk.remaining = 0;
    }
}

} // namespace

HHProposal HouseHuntingModel::operator()(const HHContext& ctx) const {
    validate_state(ctx.state);
    const HHView& view = ctx.neighborhood;
    const SiteLabel here_site = ctx.vertex_state;
    RngStream& rng = ctx.rng;

    HHAgentState next = ctx.state;
    CoreState& core = next.core;
    AgentAux& aux = next.aux;

    // Sensing pass over the box.
    bool sees_other = false;
    int committed_site = kNoSite;
    AgentId committed_agent = 0;
    view.for_each_agent([&](AgentId r, Vertex) {
        if (r == ctx.agent) return;
        sees_other = true;
        const CoreState& other = view.agent_state(r).core;
        if (other.preference == Preference::Committed &&
            (committed_site == kNoSite || r < committed_agent)) {
            committed_site = other.site;
            committed_agent = r;
        }
    });
    std::uint64_t in_view = 0;
    view.visit_distinct([&](Vertex w) {
        const SiteLabel label = view.vertex_state(w);
        if (label >= 1) in_view |= std::uint64_t{1} << label;
    });
    const std::uint64_t newly_seen = in_view & ~aux.sites_in_view;
    aux.sites_in_view = in_view;

    if (core.preference == Preference::Committed) ++*aux.quorum_timer;
    if (core.preference == Preference::Favoring && core.activity == Activity::Nest) {
        aux.lonely_timer = sees_other ? 0 : aux.lonely_timer + 1;
    }

    const bool uncommitted = core.preference == Preference::Uncommitted;
    const bool favoring = core.preference == Preference::Favoring;
    const bool active = core.activity == Activity::Active;
    const bool evaluating = aux.mission == Mission::EvaluatingSite;
    bool transitioned = false;

    // Commitment by contagion.
    if (!transitioned && core.preference != Preference::Committed && committed_site != kNoSite) {
        commit(next, committed_site, rng);
        transitioned = true;
    }

    // Quorum detection by agents stationed in or passing through a site.
    if (!transitioned && active && (uncommitted || favoring) && here_site >= 1 &&
        (uncommitted || core.site == here_site)) {
        const SiteSpec& site = scenario_.sites[static_cast<std::size_t>(here_site)];
        if (count_visible_in_site(view, ctx.agent, site) >= quorum_for(here_site)) {
            commit(next, here_site, rng);
            transitioned = true;
        }
    }

    // Inhibition among recruiters at home: hear of a rival site, go check it.
    if (!transitioned && favoring && !active && !evaluating && here_site == kHomeSite) {
        for (const auto& [site, count] : count_favoring_rivals(view, ctx.agent, core.site)) {
            if (rng.bernoulli(std::min(1.0, scenario_.messaging * count))) {
                aux.pending_evaluation = PendingEvaluation{core.site, site};
                set_mission(next, Mission::EvaluatingSite, site);
                transitioned = true;
                break;
            }
        }
    }

    // Abandonment of a lonely recruiter.
    if (!transitioned && favoring && !active && !evaluating && aux.lonely_timer > scenario_.t_beta) {
        core = {Preference::Uncommitted, Activity::Active, kNoSite};
        aux.lonely_timer = 0;
        set_mission(next, Mission::Exploring, kNoSite);
        transitioned = true;
    }

    // Discovery while exploring; acceptance is rolled once per sighting.
    if (!transitioned && uncommitted && active && newly_seen != 0) {
        for (int site = 1; site < static_cast<int>(scenario_.sites.size()); ++site) {
            if (!(newly_seen & (std::uint64_t{1} << site))) continue;
            if (!rng.bernoulli(scenario_.sites[static_cast<std::size_t>(site)].quality)) continue;
            if (rng.bernoulli(active_fraction_)) {
                core = {Preference::Favoring, Activity::Active, site};
                set_mission(next, Mission::TravelingToSite, site);
            } else {
                core = {Preference::Favoring, Activity::Nest, site};
                aux.lonely_timer = 0;
                set_mission(next, Mission::ReturningHome, kHomeSite);
            }
            transitioned = true;
            break;
        }
    }

    // Activity switching.
    if (!transitioned && (uncommitted || (favoring && !evaluating))) {
        if (!active && rng.bernoulli(scenario_.p_active)) {
            core.activity = Activity::Active;
            set_mission(next, uncommitted ? Mission::Exploring : Mission::TravelingToSite,
                        uncommitted ? kNoSite : core.site);
        } else if (active && rng.bernoulli(scenario_.p_nest)) {
            core.activity = Activity::Nest;
            if (favoring) aux.lonely_timer = 0;
            set_mission(next, Mission::ReturningHome, kHomeSite);
        }
    }

    // Committed agents go to their site once they have held quorum long enough.
    if (core.preference == Preference::Committed && *aux.quorum_timer >= scenario_.t_quorum &&
        aux.mission != Mission::ReturningToCommitted &&
        !(aux.mission == Mission::WaitingInSite && aux.mission_site == core.site)) {
        set_mission(next, Mission::ReturningToCommitted, core.site);
    }

    const Direction d = move(next, ctx);
    return {ctx.vertex_state, std::move(next), d};
}

Direction HouseHuntingModel::move(HHAgentState& s, const HHContext& ctx) const {
    const GridSpec& grid = scenario_.grid;
    const Vertex here = ctx.location;
    AgentAux& aux = s.aux;

    if (aux.mission == Mission::None) {
        // Fresh agents: infer the mission from the core state.
        const CoreState& core = s.core;
        if (core.activity == Activity::Nest) {
            set_mission(s, Mission::ReturningHome, kHomeSite);
        } else if (core.preference == Preference::Uncommitted) {
            set_mission(s, Mission::Exploring, kNoSite);
        } else if (core.preference == Preference::Favoring) {
            set_mission(s, Mission::TravelingToSite, core.site);
        } else {
            set_mission(s, Mission::WanderingCommitted, kNoSite);
        }
    }

    auto site = [&](int i) -> const SiteSpec& { return scenario_.sites[static_cast<std::size_t>(i)]; };
    auto travel = [&](int target, Mission on_arrival) {
        if (site(target).contains(here)) {
            set_mission(s, on_arrival, target);
            return random_walk_within(site(target), grid, here, ctx.rng);
        }
        if (!aux.destination) aux.destination = site(target).center_vertex();
        return navigate_toward(here, *aux.destination);
    };

    switch (aux.mission) {
    case Mission::Exploring:
    case Mission::WanderingCommitted: {
        auto [d, walk] = levy_step(aux.walk, ctx.rng, grid, here);
        aux.walk = walk;
        return d;
    }
    case Mission::ReturningHome:
        return travel(kHomeSite, Mission::WaitingInSite);
    case Mission::TravelingToSite:
    case Mission::ReturningToCommitted:
        return travel(aux.mission_site, Mission::WaitingInSite);
    case Mission::EvaluatingSite: {
        const int candidate = aux.mission_site;
        if (site(candidate).contains(here)) {
            const PendingEvaluation pending =
                aux.pending_evaluation.value_or(PendingEvaluation{s.core.site, candidate});
            if (site(candidate).quality > site(pending.current_site).quality) s.core.site = candidate;
            aux.pending_evaluation.reset();
            set_mission(s, Mission::ReturningHome, kHomeSite);
            return navigate_toward(here, site(kHomeSite).center_vertex());
        }
        if (!aux.destination) aux.destination = site(candidate).center_vertex();
        return navigate_toward(here, *aux.destination);
    }
    case Mission::WaitingInSite:
        return random_walk_within(site(aux.mission_site), grid, here, ctx.rng);
    case Mission::None: break;
    }
    return Direction::S;
}

bool is_settled(const ScenarioSpec& scenario, const HHConfiguration& config) {
    for (AgentId r = 0; r < config.agent_count(); ++r) {
        const HHAgentState& s = config.srmap[r];
        if (s.core.preference != Preference::Committed) return false;
        if (!s.aux.quorum_timer || *s.aux.quorum_timer < scenario.t_quorum) return false;
        if (!scenario.sites[static_cast<std::size_t>(s.core.site)].contains(config.locmap[r])) {
            return false;
        }
    }
    return true;
}

} // namespace geoswarm
