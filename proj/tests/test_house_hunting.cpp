#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "geoswarm/house_hunting.hpp"

using namespace geoswarm;

namespace {

/// 20x10 arena: home (0..3, 0..3), site 1 (10..15, 2..7), site 2 (17..19, 0..2).
ScenarioSpec small_scenario() {
    ScenarioSpec s;
    s.name = "small";
    s.grid = {20, 10, Topology::Bounded};
    s.sites = {{{0, 0}, {3, 3}, 0.0}, {{10, 2}, {15, 7}, 0.5}, {{17, 0}, {19, 2}, 0.8}};
    s.agent_count = 10;
    s.p_active = 0.01;
    s.p_nest = 0.09;
    s.q_min = 4;
    s.q_max = 4;
    s.t_beta = 50;
    s.t_quorum = 10;
    return s;
}

HHAgentState make_state(Preference p, Activity a, int site = kNoSite) {
    HHAgentState s;
    s.core = {p, a, site};
    if (p == Preference::Committed) s.aux.quorum_timer = 0;
    return s;
}

/// A configuration built by hand plus a way to evaluate alpha for one agent.
struct Bench {
    ScenarioSpec scenario;
    HHConfiguration config;

    explicit Bench(ScenarioSpec s) : scenario(std::move(s)) {
        scenario.agent_count = 0;
        config = build_initial_configuration(scenario, RngPolicy{0});
    }

    AgentId add(Vertex v, HHAgentState state) {
        config.srmap.push_back(std::move(state));
        config.locmap.push_back(v);
        return config.srmap.size() - 1;
    }

    HHProposal propose(AgentId r, std::uint64_t seed = 1) const {
        const HouseHuntingModel model(scenario);
        const GridSpec& grid = scenario.grid;
        const OccupancyIndex index(grid, config.locmap);
        const Vertex at = config.locmap[r];
        const HHView view(grid, config, index, at, scenario.influence_radius);
        RngStream rng = RngPolicy{seed}.stream(0, grid.index(at), 0);
        const HHContext ctx{r, config.srmap[r], at, config.svmap[grid.index(at)], view, 0, rng};
        return model(ctx);
    }

    HHView view_of(AgentId r, const OccupancyIndex& index) const {
        return HHView(scenario.grid, config, index, config.locmap[r], scenario.influence_radius);
    }
};

int chebyshev(Vertex a, Vertex b) { return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y)); }

} // namespace

TEST_CASE("quorum threshold values") {
    CHECK(quorum_threshold(4, 7, 0.3) == 6);
    CHECK(quorum_threshold(4, 7, 0.6) == 5);
    CHECK(quorum_threshold(4, 7, 0.9) == 4);
    CHECK(quorum_threshold(4, 7, 1.0) == 4);
    CHECK(quorum_threshold(4, 7, 0.0) == 7);
    for (double q = 0.0; q <= 1.0; q += 0.01) CHECK(quorum_threshold(4, 4, q) == 4);
}

TEST_CASE("quorum threshold is non-increasing and bounded") {
    std::mt19937_64 gen(4);
    for (int trial = 0; trial < 200; ++trial) {
        const int q_min = std::uniform_int_distribution<int>(1, 10)(gen);
        const int q_max = q_min + std::uniform_int_distribution<int>(0, 10)(gen);
        int previous = q_max;
        for (int k = 0; k <= 1000; ++k) {
            const int q = quorum_threshold(q_min, q_max, k / 1000.0);
            CHECK(q >= q_min);
            CHECK(q <= q_max);
            CHECK(q <= previous);
            previous = q;
        }
    }
}

TEST_CASE("round trip rate") {
    ScenarioSpec s;
    s.grid = {200, 20, Topology::Bounded};
    s.sites = {{{0, 5}, {5, 10}, 0.0}, {{50, 5}, {55, 10}, 0.5}};
    s.p_active = s.p_nest = 0.5;
    CHECK(round_trip_rate(s) == doctest::Approx(1.0 / 100.0));
    const ScenarioSpec coupled = with_default_rates(s);
    CHECK(coupled.p_active == doctest::Approx(1.0 / 900.0));
    CHECK(coupled.p_nest == doctest::Approx(1.0 / 100.0));
    CHECK(coupled.t_beta == 500);
    CHECK(coupled.t_quorum == 100);

    s.sites = {{{0, 5}, {5, 10}, 0.0}, {{30, 5}, {35, 10}, 0.5}, {{60, 5}, {65, 10}, 0.5}};
    CHECK(round_trip_rate(s) == doctest::Approx(1.0 / 90.0));

    // Candidate centred on the home centre: distance floored at one vertex.
    s.sites = {{{0, 5}, {5, 10}, 0.0}, {{2, 7}, {3, 8}, 0.5}};
    CHECK(round_trip_rate(s) == doctest::Approx(0.5));

    s.sites.resize(1);
    try {
        round_trip_rate(s);
        FAIL("expected NoCandidateSites");
    } catch (const ModelError& e) {
        CHECK(e.code() == ErrorCode::NoCandidateSites);
    }
}

TEST_CASE("scenario validation") {
    ScenarioSpec s = small_scenario();
    CHECK_NOTHROW(s.validate());
    auto rejects = [](ScenarioSpec bad) {
        try {
            bad.validate();
        } catch (const ModelError& e) {
            return e.code() == ErrorCode::InvalidScenario;
        }
        return false;
    };
    ScenarioSpec bad = s;
    bad.sites.clear();
    CHECK(rejects(bad));
    bad = s;
    bad.sites[1] = {{2, 2}, {5, 5}, 0.5};  // overlaps home
    CHECK(rejects(bad));
    bad = s;
    bad.sites[1].quality = 1.5;
    CHECK(rejects(bad));
    bad = s;
    bad.sites[2].upper_right = {20, 2};
    CHECK(rejects(bad));
    bad = s;
    bad.q_min = 5;
    CHECK(rejects(bad));
    bad = s;
    bad.p_active = 0.0;
    CHECK(rejects(bad));
    bad = s;
    bad.t_quorum = 0;
    CHECK(rejects(bad));
}

TEST_CASE("initial configuration") {
    ScenarioSpec s = small_scenario();
    s.sites[0] = {{0, 0}, {0, 0}, 0.0};
    const HHConfiguration single = build_initial_configuration(s, RngPolicy{3});
    for (Vertex v : single.locmap) CHECK(v == Vertex{0, 0});
    for (const HHAgentState& a : single.srmap) {
        CHECK(a.core == CoreState{});
        CHECK(a.aux.mission == Mission::None);
        CHECK_FALSE(a.aux.quorum_timer.has_value());
    }
    CHECK(single.svmap[s.grid.index({18, 1})] == 2);
    CHECK(single.svmap[s.grid.index({12, 4})] == 1);
    CHECK(single.svmap[s.grid.index({5, 5})] == kNoSite);
}

TEST_CASE("initial placement is uniform over the home nest (chi-squared)") {
    ScenarioSpec s = small_scenario();
    s.agent_count = 10'000;
    const HHConfiguration c = build_initial_configuration(s, RngPolicy{17});
    std::map<std::pair<int, int>, int> counts;
    for (Vertex v : c.locmap) {
        REQUIRE(s.sites[0].contains(v));
        ++counts[{v.x, v.y}];
    }
    REQUIRE(counts.size() == 16);
    const double expected = 10'000.0 / 16.0;
    double chi2 = 0.0;
    for (const auto& [cell, n] : counts) chi2 += (n - expected) * (n - expected) / expected;
    CHECK(chi2 < 37.7);  // 99.9% quantile, 15 degrees of freedom
}

TEST_CASE("visible-in-site counting") {
    Bench bench(small_scenario());
    const AgentId observer = bench.add({12, 4}, make_state(Preference::Uncommitted, Activity::Active));
    {
        const OccupancyIndex index(bench.scenario.grid, bench.config.locmap);
        CHECK(count_visible_in_site(bench.view_of(observer, index), observer, bench.scenario.sites[1]) == 0);
    }
    bench.add({10, 3}, make_state(Preference::Uncommitted, Activity::Active));
    bench.add({12, 4}, make_state(Preference::Uncommitted, Activity::Active));
    bench.add({14, 6}, make_state(Preference::Uncommitted, Activity::Active));
    bench.add({11, 1}, make_state(Preference::Uncommitted, Activity::Active));  // box, not site
    bench.add({9, 5}, make_state(Preference::Uncommitted, Activity::Active));   // box, not site
    bench.add({15, 7}, make_state(Preference::Uncommitted, Activity::Active));  // site, not box
    const OccupancyIndex index(bench.scenario.grid, bench.config.locmap);
    CHECK(count_visible_in_site(bench.view_of(observer, index), observer, bench.scenario.sites[1]) == 3);
}

TEST_CASE("visible-in-site and rival counting agree with brute force") {
    std::mt19937_64 gen(8);
    const Preference prefs[] = {Preference::Uncommitted, Preference::Favoring, Preference::Committed};
    for (int trial = 0; trial < 300; ++trial) {
        Bench bench(small_scenario());
        const int agents = std::uniform_int_distribution<int>(1, 40)(gen);
        for (int k = 0; k < agents; ++k) {
            const Vertex v{std::uniform_int_distribution<int>(8, 17)(gen),
                           std::uniform_int_distribution<int>(0, 9)(gen)};
            const Preference p = prefs[std::uniform_int_distribution<int>(0, 2)(gen)];
            const int site = p == Preference::Uncommitted ? kNoSite : std::uniform_int_distribution<int>(1, 2)(gen);
            bench.add(v, make_state(p, gen() % 2 ? Activity::Active : Activity::Nest, site));
        }
        const OccupancyIndex index(bench.scenario.grid, bench.config.locmap);
        const AgentId observer = std::uniform_int_distribution<AgentId>(0, bench.config.agent_count() - 1)(gen);
        const Vertex at = bench.config.locmap[observer];
        const int favored = std::uniform_int_distribution<int>(1, 2)(gen);

        int expected_in_site = 0;
        std::map<int, int> expected_rivals;
        for (AgentId r = 0; r < bench.config.agent_count(); ++r) {
            if (r == observer || chebyshev(bench.config.locmap[r], at) > 2) continue;
            if (bench.scenario.sites[1].contains(bench.config.locmap[r])) ++expected_in_site;
            const CoreState& core = bench.config.srmap[r].core;
            if (core.preference == Preference::Favoring && core.site != favored) ++expected_rivals[core.site];
        }
        const HHView view = bench.view_of(observer, index);
        CHECK(count_visible_in_site(view, observer, bench.scenario.sites[1]) == expected_in_site);
        CHECK(count_favoring_rivals(view, observer, favored) == expected_rivals);
    }
}

TEST_CASE("rival counting examples") {
    Bench bench(small_scenario());
    const AgentId observer = bench.add({2, 2}, make_state(Preference::Favoring, Activity::Nest, 1));
    {
        const OccupancyIndex index(bench.scenario.grid, bench.config.locmap);
        CHECK(count_favoring_rivals(bench.view_of(observer, index), observer, 1).empty());
    }
    bench.add({3, 3}, make_state(Preference::Favoring, Activity::Nest, 2));
    bench.add({1, 2}, make_state(Preference::Favoring, Activity::Nest, 2));
    bench.add({2, 1}, make_state(Preference::Favoring, Activity::Nest, 1));  // same site
    const OccupancyIndex index(bench.scenario.grid, bench.config.locmap);
    CHECK(count_favoring_rivals(bench.view_of(observer, index), observer, 1) == std::map<int, int>{{2, 2}});
}

TEST_CASE("U^N becomes U^A when the P_A roll succeeds") {
    ScenarioSpec s = small_scenario();
    s.p_active = 1.0;
    Bench bench(s);
    const AgentId r = bench.add({1, 1}, HHAgentState{});
    const HHProposal p = bench.propose(r);
    CHECK(p.state.core == CoreState{Preference::Uncommitted, Activity::Active, kNoSite});
    CHECK(p.state.aux.mission == Mission::Exploring);
    CHECK(p.state.aux.walk.remaining >= 0);
    CHECK(p.vertex_state == kHomeSite);
}

TEST_CASE("F^A_i in its site commits on seeing a fixed quorum of four") {
    std::set<Activity> activities;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        Bench bench(small_scenario());
        const AgentId r = bench.add({12, 4}, make_state(Preference::Favoring, Activity::Active, 1));
        for (Vertex v : {Vertex{11, 3}, Vertex{12, 5}, Vertex{13, 4}, Vertex{14, 6}}) {
            bench.add(v, make_state(Preference::Favoring, Activity::Active, 1));
        }
        const HHProposal p = bench.propose(r, seed);
        REQUIRE(p.state.core.preference == Preference::Committed);
        CHECK(p.state.core.site == 1);
        CHECK(p.state.aux.quorum_timer == 0);
        activities.insert(p.state.core.activity);
    }
    CHECK(activities.size() == 2);  // both C^A and C^N occur

    // Three others are not enough.
    Bench short_bench(small_scenario());
    const AgentId r = short_bench.add({12, 4}, make_state(Preference::Favoring, Activity::Active, 1));
    for (Vertex v : {Vertex{11, 3}, Vertex{12, 5}, Vertex{13, 4}}) {
        short_bench.add(v, make_state(Preference::Favoring, Activity::Active, 1));
    }
    CHECK(short_bench.propose(r).state.core.preference == Preference::Favoring);
}

TEST_CASE("nest-state agents do not detect quorum directly") {
    Bench bench(small_scenario());
    const AgentId r = bench.add({12, 4}, make_state(Preference::Favoring, Activity::Nest, 1));
    for (Vertex v : {Vertex{11, 3}, Vertex{12, 5}, Vertex{13, 4}, Vertex{14, 6}, Vertex{13, 3}}) {
        bench.add(v, make_state(Preference::Favoring, Activity::Active, 1));
    }
    CHECK(bench.propose(r).state.core.preference == Preference::Favoring);
}

TEST_CASE("contagion: an agent next to C^N_2 commits to site 2") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Bench bench(small_scenario());
        const AgentId r = bench.add({6, 6}, make_state(Preference::Uncommitted, Activity::Active));
        bench.add({7, 6}, make_state(Preference::Committed, Activity::Nest, 2));
        const HHProposal p = bench.propose(r, seed);
        CHECK(p.state.core.preference == Preference::Committed);
        CHECK(p.state.core.site == 2);
    }
}

TEST_CASE("discovery accepts with the site's quality, once per sighting") {
    // A site of quality 1 is always accepted on first sight.
    ScenarioSpec s = small_scenario();
    s.sites[1].quality = 1.0;
    int favoring_active = 0;
    const int runs = 400;
    for (int seed = 0; seed < runs; ++seed) {
        Bench bench(s);
        const AgentId r = bench.add({8, 4}, make_state(Preference::Uncommitted, Activity::Active));
        bench.config.srmap[r].aux.mission = Mission::Exploring;
        const HHProposal p = bench.propose(r, static_cast<std::uint64_t>(seed));
        REQUIRE(p.state.core.preference == Preference::Favoring);
        CHECK(p.state.core.site == 1);
        if (p.state.core.activity == Activity::Active) ++favoring_active;
    }
    // x = P_A / (P_A + P_N) = 0.1
    CHECK(favoring_active / static_cast<double>(runs) == doctest::Approx(0.1).epsilon(0.6));

    // Already in view last round: no new roll.
    Bench bench(s);
    const AgentId r = bench.add({8, 4}, make_state(Preference::Uncommitted, Activity::Active));
    bench.config.srmap[r].aux.mission = Mission::Exploring;
    bench.config.srmap[r].aux.sites_in_view = 1u << 1;
    CHECK(bench.propose(r).state.core.preference == Preference::Uncommitted);

    // Quality 0 is never accepted.
    s.sites[1].quality = 0.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Bench zero(s);
        const AgentId z = zero.add({8, 4}, make_state(Preference::Uncommitted, Activity::Active));
        zero.config.srmap[z].aux.mission = Mission::Exploring;
        CHECK(zero.propose(z, seed).state.core.preference == Preference::Uncommitted);
    }
}

TEST_CASE("inhibition sends a recruiter to evaluate the rival site") {
    ScenarioSpec s = small_scenario();
    s.messaging = 1.0;
    Bench bench(s);
    const AgentId r = bench.add({2, 2}, make_state(Preference::Favoring, Activity::Nest, 1));
    bench.config.srmap[r].aux.mission = Mission::WaitingInSite;
    bench.config.srmap[r].aux.mission_site = kHomeSite;
    bench.add({1, 1}, make_state(Preference::Favoring, Activity::Nest, 2));
    const HHProposal p = bench.propose(r);
    CHECK(p.state.core == CoreState{Preference::Favoring, Activity::Nest, 1});
    CHECK(p.state.aux.mission == Mission::EvaluatingSite);
    CHECK(p.state.aux.mission_site == 2);
    REQUIRE(p.state.aux.pending_evaluation.has_value());
    CHECK(p.state.aux.pending_evaluation->candidate_site == 2);
}

TEST_CASE("evaluation keeps the better of the two sites") {
    auto evaluate = [](double current_q, double candidate_q) {
        ScenarioSpec s = small_scenario();
        s.sites[1].quality = current_q;
        s.sites[2].quality = candidate_q;
        Bench bench(s);
        HHAgentState state = make_state(Preference::Favoring, Activity::Nest, 1);
        state.aux.mission = Mission::EvaluatingSite;
        state.aux.mission_site = 2;
        state.aux.pending_evaluation = PendingEvaluation{1, 2};
        const AgentId r = bench.add({18, 1}, state);
        const HHProposal p = bench.propose(r);
        CHECK(p.state.aux.mission == Mission::ReturningHome);
        CHECK_FALSE(p.state.aux.pending_evaluation.has_value());
        CHECK(p.state.core.activity == Activity::Nest);
        return p.state.core.site;
    };
    CHECK(evaluate(0.3, 0.9) == 2);
    CHECK(evaluate(0.9, 0.3) == 1);
    CHECK(evaluate(0.5, 0.5) == 1);  // ties keep the current site
}

TEST_CASE("lonely recruiter abandons after t_beta") {
    ScenarioSpec s = small_scenario();
    Bench bench(s);
    HHAgentState state = make_state(Preference::Favoring, Activity::Nest, 1);
    state.aux.mission = Mission::ReturningHome;
    state.aux.lonely_timer = s.t_beta;
    const AgentId r = bench.add({6, 8}, state);
    const HHProposal p = bench.propose(r);
    CHECK(p.state.core == CoreState{Preference::Uncommitted, Activity::Active, kNoSite});
    CHECK(p.state.aux.mission == Mission::Exploring);

    // Seeing anyone resets the timer.
    Bench company(s);
    const AgentId a = company.add({6, 8}, state);
    company.add({7, 8}, HHAgentState{});
    const HHProposal q = company.propose(a);
    CHECK(q.state.core.preference == Preference::Favoring);
    CHECK(q.state.aux.lonely_timer == 0);
}

TEST_CASE("committed agents return to their site after t_Q") {
    ScenarioSpec s = small_scenario();
    Bench bench(s);
    HHAgentState state = make_state(Preference::Committed, Activity::Active, 1);
    state.aux.mission = Mission::WanderingCommitted;
    state.aux.quorum_timer = s.t_quorum - 1;
    const AgentId r = bench.add({5, 5}, state);
    const HHProposal p = bench.propose(r);
    CHECK(p.state.aux.mission == Mission::ReturningToCommitted);
    CHECK(p.direction == Direction::R);
    CHECK(p.state.aux.quorum_timer == s.t_quorum);
}

TEST_CASE("malformed agent state is rejected") {
    Bench bench(small_scenario());
    const AgentId r = bench.add({1, 1}, make_state(Preference::Favoring, Activity::Nest));
    try {
        bench.propose(r);
        FAIL("expected InvalidAgentState");
    } catch (const ModelError& e) {
        CHECK(e.code() == ErrorCode::InvalidAgentState);
    }
    Bench timer(small_scenario());
    HHAgentState bad = make_state(Preference::Uncommitted, Activity::Nest);
    bad.aux.quorum_timer = 3;
    const AgentId b = timer.add({1, 1}, bad);
    CHECK_THROWS_AS(timer.propose(b), ModelError);
}

TEST_CASE("levy step along a fixed heading") {
    const GridSpec grid{20, 20, Topology::Bounded};
    RngStream rng(1);
    LevyWalkState walk;
    walk.heading = 0.0;
    walk.remaining = 3;
    auto [d, next] = levy_step(walk, rng, grid, {5, 5});
    CHECK(d == Direction::R);
    CHECK(next.remaining == 2);
}

TEST_CASE("levy step redraws at walls and never leaves the grid") {
    const GridSpec grid{16, 8, Topology::Bounded};
    RngStream rng(2);
    LevyWalkState walk;
    walk.heading = std::numbers::pi;
    walk.remaining = 10;
    auto [d, next] = levy_step(walk, rng, grid, {0, 4});
    CHECK(d != Direction::L);
    CHECK(next.heading != walk.heading);

    Vertex at{3, 3};
    LevyWalkState w;
    for (int i = 0; i < 20'000; ++i) {
        auto [dir, nw] = levy_step(w, rng, grid, at);
        REQUIRE(is_applicable(grid, at, dir));
        at = apply_direction(grid, at, dir);
        w = nw;
    }
}

TEST_CASE("levy leg lengths follow the truncated power law (Kolmogorov-Smirnov)") {
    const double exponent = 2.0;
    const double max_length = 80.0;
    auto cdf = [&](double l) {
        return (1.0 - std::pow(l, 1.0 - exponent)) / (1.0 - std::pow(max_length, 1.0 - exponent));
    };
    RngStream rng(12345);
    const std::size_t n = 100'000;
    std::vector<double> samples(n);
    for (double& x : samples) x = levy_length(rng.uniform(), exponent, max_length);
    std::sort(samples.begin(), samples.end());
    CHECK(samples.front() >= 1.0);
    CHECK(samples.back() <= max_length);
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = cdf(samples[i]);
        d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(f - static_cast<double>(i + 1) / n)});
    }
    CHECK(d < 1.63 / std::sqrt(static_cast<double>(n)));  // 1% critical value
}

TEST_CASE("navigation steps") {
    CHECK(navigate_toward({0, 0}, {3, 0}) == Direction::R);
    CHECK(navigate_toward({0, 0}, {0, 0}) == Direction::S);
    CHECK(navigate_toward({0, 0}, {2, 2}) == Direction::R);  // tie: horizontal first

    const GridSpec grid{10, 10, Topology::Bounded};
    Vertex at{0, 0};
    int steps = 0;
    while (at != Vertex{2, 5}) {
        const Vertex before = at;
        at = apply_direction(grid, at, navigate_toward(at, {2, 5}));
        CHECK(std::abs(2 - at.x) <= std::abs(2 - before.x));
        CHECK(std::abs(5 - at.y) <= std::abs(5 - before.y));
        REQUIRE(++steps <= 7);
    }
    CHECK(steps == 7);
}

TEST_CASE("navigation reaches any target in Manhattan-distance steps") {
    std::mt19937_64 gen(6);
    const GridSpec grid{30, 30, Topology::Bounded};
    std::uniform_int_distribution<int> coord(0, 29);
    for (int trial = 0; trial < 500; ++trial) {
        Vertex at{coord(gen), coord(gen)};
        const Vertex target{coord(gen), coord(gen)};
        const int expected = std::abs(at.x - target.x) + std::abs(at.y - target.y);
        int steps = 0;
        while (at != target && steps <= expected) {
            at = apply_direction(grid, at, navigate_toward(at, target));
            ++steps;
        }
        CHECK(at == target);
        CHECK(steps == expected);
    }
}

TEST_CASE("random walk within a rectangle stays inside") {
    const GridSpec grid{20, 10, Topology::Bounded};
    const SiteSpec area{{10, 2}, {15, 7}, 0.5};
    RngStream rng(3);
    Vertex at{12, 4};
    std::set<std::pair<int, int>> visited;
    for (int i = 0; i < 5000; ++i) {
        at = apply_direction(grid, at, random_walk_within(area, grid, at, rng));
        REQUIRE(area.contains(at));
        visited.insert({at.x, at.y});
    }
    CHECK(visited.size() == area.area());
}

namespace {

/// Runs the model and feeds every (before, after) agent pair to check.
template <class Check>
void audit_run(const ScenarioSpec& s, std::uint64_t seed, int rounds, Check&& check) {
    const HouseHuntingModel model(s);
    const RngPolicy rng{seed};
    HHConfiguration c = build_initial_configuration(s, rng);
    for (int t = 0; t < rounds; ++t) {
        HHConfiguration next = step(s.grid, c, model, rng, static_cast<std::uint64_t>(t), model.step_options());
        for (AgentId r = 0; r < c.agent_count(); ++r) check(c.srmap[r], next.srmap[r]);
        REQUIRE(next.svmap == c.svmap);
        c = std::move(next);
    }
}

} // namespace

TEST_CASE("long runs only take edges of the state machine") {
    ScenarioSpec s = small_scenario();
    s.agent_count = 30;
    s.p_active = 0.05;
    s.p_nest = 0.02;
    s.messaging = 0.5;
    s.sites[1].quality = 0.5;
    std::set<std::pair<std::string, std::string>> seen;
    audit_run(s, 99, 4000, [&](const HHAgentState& before, const HHAgentState& after) {
        const CoreState& a = before.core;
        const CoreState& b = after.core;
        INFO(to_string(a) << " -> " << to_string(b));
        CHECK(is_allowed_transition(a, b));
        CHECK((b.preference == Preference::Uncommitted) == (b.site == kNoSite));
        CHECK((b.preference == Preference::Committed) == after.aux.quorum_timer.has_value());
        if (!(a == b)) seen.insert({to_string(a), to_string(b)});
    });
    // The run should have exercised a good part of the machine.
    CHECK(seen.size() >= 6);
}

TEST_CASE("the all-committed set is absorbing") {
    ScenarioSpec s = small_scenario();
    HHConfiguration c = build_initial_configuration(s, RngPolicy{1});
    RngStream pick(4);
    for (HHAgentState& a : c.srmap) {
        a.core = {Preference::Committed, pick.bernoulli(0.5) ? Activity::Active : Activity::Nest,
                  static_cast<int>(1 + pick.below(2))};
        a.aux.quorum_timer = 0;
    }
    const HouseHuntingModel model(s);
    for (std::uint64_t t = 0; t < 2000; ++t) {
        HHConfiguration next = step(s.grid, c, model, RngPolicy{1}, t, model.step_options());
        for (AgentId r = 0; r < c.agent_count(); ++r) {
            REQUIRE(next.srmap[r].core == c.srmap[r].core);
        }
        c = std::move(next);
    }
    CHECK(is_settled(s, c));
}

TEST_CASE("allowed transition table") {
    using P = Preference;
    using A = Activity;
    CHECK(is_allowed_transition({P::Uncommitted, A::Nest}, {P::Uncommitted, A::Active}));
    CHECK(is_allowed_transition({P::Uncommitted, A::Active}, {P::Favoring, A::Nest, 1}));
    CHECK_FALSE(is_allowed_transition({P::Uncommitted, A::Nest}, {P::Favoring, A::Nest, 1}));
    CHECK(is_allowed_transition({P::Favoring, A::Nest, 1}, {P::Uncommitted, A::Active}));
    CHECK_FALSE(is_allowed_transition({P::Favoring, A::Active, 1}, {P::Uncommitted, A::Active}));
    CHECK(is_allowed_transition({P::Favoring, A::Nest, 1}, {P::Favoring, A::Nest, 2}));
    CHECK_FALSE(is_allowed_transition({P::Favoring, A::Active, 1}, {P::Favoring, A::Active, 2}));
    CHECK(is_allowed_transition({P::Uncommitted, A::Nest}, {P::Committed, A::Active, 1}));
    CHECK_FALSE(is_allowed_transition({P::Committed, A::Nest, 1}, {P::Committed, A::Active, 1}));
    CHECK_FALSE(is_allowed_transition({P::Committed, A::Nest, 1}, {P::Uncommitted, A::Nest}));
}
