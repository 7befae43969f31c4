#include <cstdio>
#include <fstream>
#include <sstream>

#include "geoswarm/harness.hpp"

namespace geoswarm {

using nlohmann::json;

namespace {

json vertex_json(Vertex v) { return json::array({v.x, v.y}); }

Vertex vertex_from(const json& j) {
    if (!j.is_array() || j.size() != 2) {
        throw ModelError(ErrorCode::InvalidScenario, "vertex must be a [x, y] pair");
    }
    return {j[0].get<int>(), j[1].get<int>()};
}

} // namespace

void to_json(json& j, const ScenarioSpec& s) {
    json sites = json::array();
    for (const SiteSpec& site : s.sites) {
        sites.push_back({{"lower_left", vertex_json(site.lower_left)},
                         {"upper_right", vertex_json(site.upper_right)},
                         {"quality", site.quality}});
    }
    j = json{
        {"name", s.name},
        {"family", s.family},
        {"multiplier", s.multiplier},
        {"grid",
         {{"n", s.grid.n},
          {"m", s.grid.m},
          {"topology", s.grid.topology == Topology::Toroidal ? "toroidal" : "bounded"}}},
        {"sites", sites},
        {"agent_count", s.agent_count},
        {"influence_radius", s.influence_radius},
        {"p_active", s.p_active},
        {"p_nest", s.p_nest},
        {"messaging", s.messaging},
        {"q_min", s.q_min},
        {"q_max", s.q_max},
        {"t_beta", s.t_beta},
        {"t_quorum", s.t_quorum},
        {"levy_exponent", s.levy_exponent},
        {"max_rounds", s.max_rounds},
    };
}

void from_json(const json& j, ScenarioSpec& s) {
    try {
        s = ScenarioSpec{};
        s.name = j.value("name", std::string{});
        s.family = j.value("family", std::string{});
        s.multiplier = j.value("multiplier", 0.0);
        const json& grid = j.at("grid");
        s.grid.n = grid.at("n").get<int>();
        s.grid.m = grid.at("m").get<int>();
        const std::string topology = grid.value("topology", std::string{"bounded"});
        if (topology == "bounded") {
            s.grid.topology = Topology::Bounded;
        } else if (topology == "toroidal") {
            s.grid.topology = Topology::Toroidal;
        } else {
            throw ModelError(ErrorCode::InvalidScenario, "unknown topology '" + topology + "'");
        }
        for (const json& site : j.at("sites")) {
            s.sites.push_back({vertex_from(site.at("lower_left")), vertex_from(site.at("upper_right")),
                               site.at("quality").get<double>()});
        }
        s.agent_count = j.value("agent_count", std::size_t{100});
        s.influence_radius = j.value("influence_radius", 2);
        s.messaging = j.value("messaging", 1.0 / 15.0);
        s.q_min = j.value("q_min", 4);
        s.q_max = j.value("q_max", 4);
        s.levy_exponent = j.value("levy_exponent", 2.0);
        s.max_rounds = j.value("max_rounds", std::uint64_t{500'000});

        const bool has_rates = j.contains("p_active") || j.contains("p_nest") ||
                               j.contains("t_beta") || j.contains("t_quorum");
        if (has_rates) {
            s.p_active = j.at("p_active").get<double>();
            s.p_nest = j.at("p_nest").get<double>();
            s.t_beta = j.at("t_beta").get<std::int64_t>();
            s.t_quorum = j.at("t_quorum").get<std::int64_t>();
        } else {
            s = with_default_rates(std::move(s));
        }
    } catch (const json::exception& e) {
        throw ModelError(ErrorCode::InvalidScenario, e.what());
    } catch (const ModelError& e) {
        if (e.code() == ErrorCode::InvalidScenario) throw;
        throw ModelError(ErrorCode::InvalidScenario, e.what());
    }
}

ScenarioSpec load_scenario_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ModelError(ErrorCode::Io, "cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ModelError(ErrorCode::InvalidScenario, path.string() + ": " + e.what());
    }
    ScenarioSpec s = j.get<ScenarioSpec>();
    s.validate();
    return s;
}

ScenarioSpec resolve_scenario(const std::string& name_or_path) {
    if (auto builtin = find_builtin(name_or_path)) return *builtin;
    return load_scenario_file(name_or_path);
}

namespace {

constexpr int kSiteSize = 6;
constexpr int kHomeOffset = 2;
constexpr int kNearDistance = 30;

struct Layout {
    int n;
    int m;
};

SiteSpec square_site(int x1, const Layout& layout, double quality) {
    const int y1 = (layout.m - kSiteSize) / 2;
    return {{x1, y1}, {x1 + kSiteSize - 1, y1 + kSiteSize - 1}, quality};
}

std::string format_quality(double q) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.1f", q);
    return buf;
}

/// Home at x1 = home_x, candidate sites given as (x1, quality).
ScenarioSpec make_scenario(std::string name, std::string family, double multiplier,
                           const Layout& layout, int home_x,
                           std::initializer_list<std::pair<int, double>> candidates, int q_max) {
    ScenarioSpec s;
    s.name = std::move(name);
    s.family = std::move(family);
    s.multiplier = multiplier;
    s.grid = {layout.n, layout.m, Topology::Bounded};
    s.sites.push_back(square_site(home_x, layout, 0.0));
    for (const auto& [x1, quality] : candidates) s.sites.push_back(square_site(x1, layout, quality));
    s.agent_count = 100;
    s.influence_radius = 2;
    s.messaging = 1.0 / 15.0;
    s.q_min = 4;
    s.q_max = q_max;
    s = with_default_rates(std::move(s));
    s.validate();
    return s;
}

} // namespace

std::vector<ScenarioSpec> builtin_scenarios() {
    std::vector<ScenarioSpec> out;
    const std::pair<const char*, int> modes[] = {{"fixed", 4}, {"scaled", 7}};

    // Further nest of higher quality, far site on the path beyond the near one.
    const std::pair<int, Layout> franks[] = {{2, {80, 16}}, {3, {180, 18}}, {9, {300, 18}}};
    for (const auto& [k, layout] : franks) {
        for (const auto& [mode, q_max] : modes) {
            const int near_x = kHomeOffset + kNearDistance;
            const int far_x = kHomeOffset + kNearDistance * k;
            const std::string base = "franks-" + std::to_string(k) + "x-";
            out.push_back(make_scenario(base + mode, "franks", k, layout, kHomeOffset,
                                        {{near_x, 0.3}, {far_x, 0.9}}, q_max));
            out.push_back(make_scenario(base + "control-" + mode, "franks-control", k, layout,
                                        kHomeOffset, {{near_x, 0.3}, {far_x, 0.3}}, q_max));
        }
    }

    // Low-quality nest in the way of (or opposite to) the far high-quality one.
    for (int k = 2; k <= 9; ++k) {
        for (const auto& [mode, q_max] : modes) {
            const std::string suffix = std::to_string(k) + "x-" + mode;
            out.push_back(make_scenario("inway-" + suffix, "in-the-way", k, {300, 18}, kHomeOffset,
                                        {{kHomeOffset + kNearDistance, 0.3},
                                         {kHomeOffset + kNearDistance * k, 0.9}},
                                        q_max));
            const int home_x = kHomeOffset + kNearDistance;
            const int far_x = home_x + kNearDistance * k;
            const int n = std::max(300, far_x + kSiteSize - 1 + 3);
            out.push_back(make_scenario("outway-" + suffix, "out-of-way", k, {n, 18}, home_x,
                                        {{kHomeOffset, 0.3}, {far_x, 0.9}}, q_max));
        }
    }

    // Quality difference: 2x in-the-way vs equidistant, best site quality 1.0.
    for (double near_q : {0.3, 0.6, 0.9}) {
        for (const auto& [mode, q_max] : modes) {
            const std::string suffix = "near" + format_quality(near_q) + "-" + mode;
            out.push_back(make_scenario("quality-2x-" + suffix, "quality-2x", 2, {80, 16},
                                        kHomeOffset,
                                        {{kHomeOffset + kNearDistance, near_q},
                                         {kHomeOffset + 2 * kNearDistance, 1.0}},
                                        q_max));
            const int home_x = 37;
            out.push_back(make_scenario("equidistant-" + suffix, "equidistant", 1, {80, 16}, home_x,
                                        {{home_x - kNearDistance, near_q},
                                         {home_x + kNearDistance, 1.0}},
                                        q_max));
        }
    }
    return out;
}

std::optional<ScenarioSpec> find_builtin(const std::string& name) {
    for (ScenarioSpec& s : builtin_scenarios()) {
        if (s.name == name) return std::move(s);
    }
    return std::nullopt;
}

} // namespace geoswarm
