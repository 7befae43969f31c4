#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "geoswarm/grid.hpp"

namespace geoswarm {

/// Agents are dense ids 0..|R|-1, fixed for a run.
using AgentId = std::size_t;

/// Full system snapshot. svmap is indexed by GridSpec::index, srmap and
/// locmap by agent id.
template <class VertexState, class AgentState>
struct GlobalConfiguration {
    std::vector<VertexState> svmap;
    std::vector<AgentState> srmap;
    std::vector<Vertex> locmap;

    std::size_t agent_count() const noexcept { return srmap.size(); }

    friend bool operator==(const GlobalConfiguration&, const GlobalConfiguration&) = default;
};

/// Contents of one vertex. myagents is sorted ascending and states[k]
/// belongs to myagents[k].
template <class VertexState, class AgentState>
struct LocalConfiguration {
    VertexState sv{};
    std::vector<AgentId> myagents;
    std::vector<AgentState> states;

    const AgentState* state_of(AgentId r) const noexcept {
        auto it = std::lower_bound(myagents.begin(), myagents.end(), r);
        if (it == myagents.end() || *it != r) return nullptr;
        return &states[static_cast<std::size_t>(it - myagents.begin())];
    }

    friend bool operator==(const LocalConfiguration&, const LocalConfiguration&) = default;
};

struct Edge {
    Vertex source;
    Vertex target;

    friend constexpr bool operator==(Edge, Edge) = default;
};

template <class VertexState, class AgentState>
struct TransitoryConfiguration {
    std::vector<VertexState> svmap;
    std::vector<AgentState> srmap;
    std::vector<Edge> edgemap;

    friend bool operator==(const TransitoryConfiguration&, const TransitoryConfiguration&) = default;
};

template <class VertexState, class AgentState>
struct LocalTransitoryConfiguration {
    VertexState sv{};
    std::vector<AgentId> myagents;
    std::vector<AgentState> states;
    std::vector<Direction> dirmap;

    friend bool operator==(const LocalTransitoryConfiguration&,
                           const LocalTransitoryConfiguration&) = default;
};

template <class VertexState, class AgentState>
void check_well_formed(const GridSpec& grid, const GlobalConfiguration<VertexState, AgentState>& c) {
    if (c.svmap.size() != grid.vertex_count()) {
        throw ModelError(ErrorCode::IncompatibleLocals, "svmap does not cover every vertex");
    }
    if (c.locmap.size() != c.srmap.size()) {
        throw ModelError(ErrorCode::IncompatibleLocals, "srmap and locmap have different domains");
    }
    for (Vertex v : c.locmap) {
        if (!grid.contains(v)) {
            throw ModelError(ErrorCode::IncompatibleLocals, "agent located off the grid");
        }
    }
}

template <class VertexState, class AgentState>
LocalConfiguration<VertexState, AgentState>
project(const GridSpec& grid, const GlobalConfiguration<VertexState, AgentState>& c, Vertex v) {
    LocalConfiguration<VertexState, AgentState> local;
    local.sv = c.svmap[grid.index(v)];
    for (AgentId r = 0; r < c.locmap.size(); ++r) {
        if (c.locmap[r] == v) {
            local.myagents.push_back(r);
            local.states.push_back(c.srmap[r]);
        }
    }
    return local;
}

/// Inverse of project. locals is indexed by GridSpec::index. The agent set
/// is taken to be 0..k-1 where k is the number of listed agents; every id
/// must appear exactly once.
template <class VertexState, class AgentState>
GlobalConfiguration<VertexState, AgentState>
merge(const GridSpec& grid, std::span<const LocalConfiguration<VertexState, AgentState>> locals) {
    if (locals.size() != grid.vertex_count()) {
        throw ModelError(ErrorCode::IncompatibleLocals, "need exactly one local configuration per vertex");
    }
    std::size_t total = 0;
    for (const auto& local : locals) {
        if (local.myagents.size() != local.states.size()) {
            throw ModelError(ErrorCode::IncompatibleLocals, "srmap domain differs from myagents");
        }
        total += local.myagents.size();
    }
    GlobalConfiguration<VertexState, AgentState> c;
    c.svmap.reserve(locals.size());
    c.srmap.resize(total);
    c.locmap.resize(total);
    std::vector<bool> seen(total, false);
    for (std::size_t i = 0; i < locals.size(); ++i) {
        const auto& local = locals[i];
        c.svmap.push_back(local.sv);
        const Vertex v = grid.vertex(i);
        for (std::size_t k = 0; k < local.myagents.size(); ++k) {
            const AgentId r = local.myagents[k];
            if (r >= total || seen[r]) {
                throw ModelError(ErrorCode::IncompatibleLocals,
                                 "agent " + std::to_string(r) + " is not owned by exactly one vertex");
            }
            seen[r] = true;
            c.srmap[r] = local.states[k];
            c.locmap[r] = v;
        }
    }
    return c;
}

template <class VertexState, class AgentState>
GlobalConfiguration<VertexState, AgentState>
merge(const GridSpec& grid, const std::vector<LocalConfiguration<VertexState, AgentState>>& locals) {
    return merge<VertexState, AgentState>(
        grid, std::span<const LocalConfiguration<VertexState, AgentState>>(locals));
}

template <class VertexState, class AgentState>
LocalTransitoryConfiguration<VertexState, AgentState>
project_transitory(const GridSpec& grid, const TransitoryConfiguration<VertexState, AgentState>& t,
                   Vertex v) {
    LocalTransitoryConfiguration<VertexState, AgentState> local;
    local.sv = t.svmap[grid.index(v)];
    for (AgentId r = 0; r < t.edgemap.size(); ++r) {
        const Edge& e = t.edgemap[r];
        if (e.source != v) continue;
        auto d = direction_between(grid, e.source, e.target);
        if (!d) throw ModelError(ErrorCode::InvalidMove, "edgemap entry is not a grid edge");
        local.myagents.push_back(r);
        local.states.push_back(t.srmap[r]);
        local.dirmap.push_back(*d);
    }
    return local;
}

template <class VertexState, class AgentState>
TransitoryConfiguration<VertexState, AgentState>
merge_transitory(const GridSpec& grid,
                 std::span<const LocalTransitoryConfiguration<VertexState, AgentState>> locals) {
    if (locals.size() != grid.vertex_count()) {
        throw ModelError(ErrorCode::IncompatibleLocals, "need exactly one local configuration per vertex");
    }
    std::size_t total = 0;
    for (const auto& local : locals) {
        if (local.myagents.size() != local.states.size() ||
            local.myagents.size() != local.dirmap.size()) {
            throw ModelError(ErrorCode::IncompatibleLocals, "srmap/dirmap domain differs from myagents");
        }
        total += local.myagents.size();
    }
    TransitoryConfiguration<VertexState, AgentState> t;
    t.svmap.reserve(locals.size());
    t.srmap.resize(total);
    t.edgemap.resize(total);
    std::vector<bool> seen(total, false);
    for (std::size_t i = 0; i < locals.size(); ++i) {
        const auto& local = locals[i];
        t.svmap.push_back(local.sv);
        const Vertex v = grid.vertex(i);
        for (std::size_t k = 0; k < local.myagents.size(); ++k) {
            const AgentId r = local.myagents[k];
            if (r >= total || seen[r]) {
                throw ModelError(ErrorCode::IncompatibleLocals,
                                 "agent " + std::to_string(r) + " is not owned by exactly one vertex");
            }
            seen[r] = true;
            t.srmap[r] = local.states[k];
            t.edgemap[r] = Edge{v, apply_direction(grid, v, local.dirmap[k])};
        }
    }
    return t;
}

template <class VertexState, class AgentState>
TransitoryConfiguration<VertexState, AgentState>
merge_transitory(const GridSpec& grid,
                 const std::vector<LocalTransitoryConfiguration<VertexState, AgentState>>& locals) {
    return merge_transitory<VertexState, AgentState>(
        grid, std::span<const LocalTransitoryConfiguration<VertexState, AgentState>>(locals));
}

template <class VertexState, class AgentState>
GlobalConfiguration<VertexState, AgentState>
move(TransitoryConfiguration<VertexState, AgentState> t) {
    GlobalConfiguration<VertexState, AgentState> c;
    c.svmap = std::move(t.svmap);
    c.srmap = std::move(t.srmap);
    c.locmap.reserve(t.edgemap.size());
    for (const Edge& e : t.edgemap) c.locmap.push_back(e.target);
    return c;
}

/// Vertex -> agents bucket index (CSR layout), agents ascending inside a
/// bucket. Built once per round so neighbourhood queries avoid a scan of R.
class OccupancyIndex {
public:
    OccupancyIndex() = default;

    OccupancyIndex(const GridSpec& grid, std::span<const Vertex> locmap)
        : offsets_(grid.vertex_count() + 1, 0), agents_(locmap.size()) {
        for (Vertex v : locmap) ++offsets_[grid.index(v) + 1];
        for (std::size_t i = 1; i < offsets_.size(); ++i) offsets_[i] += offsets_[i - 1];
        std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
        for (AgentId r = 0; r < locmap.size(); ++r) agents_[cursor[grid.index(locmap[r])]++] = r;
    }

    std::span<const AgentId> agents_at(std::size_t vertex_index) const noexcept {
        return {agents_.data() + offsets_[vertex_index],
                offsets_[vertex_index + 1] - offsets_[vertex_index]};
    }

    std::size_t vertex_count() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }

private:
    std::vector<std::size_t> offsets_;
    std::vector<AgentId> agents_;
};

/// Non-owning view of the (2I+1)^2 Chebyshev box around a vertex. Offsets
/// that leave a bounded grid are absent; toroidal offsets wrap. Valid only
/// while the configuration and index it refers to are alive.
template <class VertexState, class AgentState>
class NeighborhoodView {
public:
    using Config = GlobalConfiguration<VertexState, AgentState>;

    NeighborhoodView(const GridSpec& grid, const Config& config, const OccupancyIndex& index,
                     Vertex center, int radius)
        : grid_(&grid), config_(&config), index_(&index), center_(center), radius_(radius) {}

    Vertex center() const noexcept { return center_; }
    int radius() const noexcept { return radius_; }
    const GridSpec& grid() const noexcept { return *grid_; }

    std::optional<Vertex> vertex_at(int a, int b) const noexcept {
        if (a < -radius_ || a > radius_ || b < -radius_ || b > radius_) return std::nullopt;
        return grid_->offset(center_, a, b);
    }

    const VertexState& vertex_state(Vertex w) const { return config_->svmap[grid_->index(w)]; }
    std::span<const AgentId> agents_at(Vertex w) const noexcept {
        return index_->agents_at(grid_->index(w));
    }
    const AgentState& agent_state(AgentId r) const { return config_->srmap[r]; }
    Vertex agent_location(AgentId r) const { return config_->locmap[r]; }

    /// Calls fn(a, b, w) for every present offset, row-major from (-I, -I).
    /// On small toroidal grids the same vertex may appear at several
    /// offsets; visit_distinct dedups.
    template <class Fn>
    void for_each_offset(Fn&& fn) const {
        for (int b = -radius_; b <= radius_; ++b) {
            for (int a = -radius_; a <= radius_; ++a) {
                if (auto w = grid_->offset(center_, a, b)) fn(a, b, *w);
            }
        }
    }

    /// Calls fn(w) once per distinct vertex in the box.
    template <class Fn>
    void visit_distinct(Fn&& fn) const {
        const bool may_alias = grid_->topology == Topology::Toroidal &&
                               (grid_->n <= 2 * radius_ || grid_->m <= 2 * radius_);
        if (!may_alias) {
            for_each_offset([&](int, int, Vertex w) { fn(w); });
            return;
        }
        std::vector<Vertex> seen;
        for_each_offset([&](int, int, Vertex w) {
            if (std::find(seen.begin(), seen.end(), w) != seen.end()) return;
            seen.push_back(w);
            fn(w);
        });
    }

    /// Calls fn(r, w) for every agent in the box (each agent once).
    template <class Fn>
    void for_each_agent(Fn&& fn) const {
        visit_distinct([&](Vertex w) {
            for (AgentId r : agents_at(w)) fn(r, w);
        });
    }

private:
    const GridSpec* grid_;
    const Config* config_;
    const OccupancyIndex* index_;
    Vertex center_;
    int radius_;
};

/// Owning neighbourhood map M_v: offset (a, b) -> local configuration.
template <class VertexState, class AgentState>
struct NeighborhoodMap {
    Vertex center;
    int radius = 0;
    std::map<std::pair<int, int>, LocalConfiguration<VertexState, AgentState>> entries;

    friend bool operator==(const NeighborhoodMap&, const NeighborhoodMap&) = default;
};

template <class VertexState, class AgentState>
NeighborhoodMap<VertexState, AgentState>
neighborhood(const GlobalConfiguration<VertexState, AgentState>& c, const GridSpec& grid, Vertex v,
             int radius) {
    NeighborhoodMap<VertexState, AgentState> map;
    map.center = v;
    map.radius = radius;
    for (int b = -radius; b <= radius; ++b) {
        for (int a = -radius; a <= radius; ++a) {
            if (auto w = grid.offset(v, a, b)) map.entries.emplace(std::pair{a, b}, project(grid, c, *w));
        }
    }
    return map;
}

} // namespace geoswarm
