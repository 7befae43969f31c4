#pragma once

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "geoswarm/configuration.hpp"
#include "geoswarm/rng.hpp"

namespace geoswarm {

template <class VertexState, class AgentState>
struct TransitionContext {
    AgentId agent;
    const AgentState& state;
    Vertex location;
    const VertexState& vertex_state;
    const NeighborhoodView<VertexState, AgentState>& neighborhood;
    std::uint64_t round;
    RngStream& rng;
};

template <class VertexState, class AgentState>
struct AgentProposal {
    VertexState vertex_state{};
    AgentState state{};
    Direction direction = Direction::S;
};

/// Outcome of phase two at one vertex.
template <class VertexState>
struct Reconciliation {
    VertexState vertex_state{};
    std::vector<bool> accepted;
};

/// Lowest agent id wins the vertex state; every agent keeps its proposal.
struct LowestIdRule {
    template <class VertexState, class AgentState>
    Reconciliation<VertexState>
    operator()(const VertexState& current,
               std::span<const AgentProposal<VertexState, AgentState>> proposals) const {
        Reconciliation<VertexState> out;
        out.vertex_state = proposals.empty() ? current : proposals.front().vertex_state;
        out.accepted.assign(proposals.size(), true);
        return out;
    }
};

template <class Alpha, class VertexState, class AgentState>
concept TransitionFunction = requires(Alpha alpha, const TransitionContext<VertexState, AgentState>& ctx) {
    { alpha(ctx) } -> std::convertible_to<AgentProposal<VertexState, AgentState>>;
};

/// Local transition of one vertex: phase one runs alpha for every agent at
/// the centre (ascending id, one stream each), phase two applies the rule.
template <class VertexState, class AgentState, class Alpha, class Rule>
LocalTransitoryConfiguration<VertexState, AgentState>
delta(const NeighborhoodView<VertexState, AgentState>& view, Alpha&& alpha, Rule&& rule,
      const RngPolicy& rng, std::uint64_t round) {
    const GridSpec& grid = view.grid();
    const Vertex v = view.center();
    const std::size_t vertex_index = grid.index(v);
    const VertexState& sv = view.vertex_state(v);
    const auto agents = view.agents_at(v);

    std::vector<AgentProposal<VertexState, AgentState>> proposals;
    proposals.reserve(agents.size());
    for (std::size_t rank = 0; rank < agents.size(); ++rank) {
        const AgentId r = agents[rank];
        RngStream stream = rng.stream(round, vertex_index, rank);
        const TransitionContext<VertexState, AgentState> ctx{
            r, view.agent_state(r), v, sv, view, round, stream};
        proposals.push_back(alpha(ctx));
    }

    Reconciliation<VertexState> outcome = rule(
        sv, std::span<const AgentProposal<VertexState, AgentState>>(proposals));

    LocalTransitoryConfiguration<VertexState, AgentState> local;
    local.sv = outcome.vertex_state;
    local.myagents.assign(agents.begin(), agents.end());
    local.states.reserve(agents.size());
    local.dirmap.reserve(agents.size());
    for (std::size_t k = 0; k < agents.size(); ++k) {
        if (outcome.accepted[k]) {
            local.states.push_back(std::move(proposals[k].state));
            local.dirmap.push_back(proposals[k].direction);
        } else {
            local.states.push_back(view.agent_state(agents[k]));
            local.dirmap.push_back(Direction::S);
        }
    }
    return local;
}

struct StepOptions {
    int radius = 2;
    /// Worker threads for per-vertex evaluation; 0 or 1 means sequential.
    unsigned threads = 1;
};

/// One synchronous round: every vertex runs delta on its neighbourhood of
/// C_t, the results are merged into a transitory configuration, then moved.
template <class VertexState, class AgentState, class Alpha, class Rule = LowestIdRule>
GlobalConfiguration<VertexState, AgentState>
step(const GridSpec& grid, const GlobalConfiguration<VertexState, AgentState>& current, Alpha&& alpha,
     const RngPolicy& rng, std::uint64_t round, const StepOptions& options = {}, Rule&& rule = {}) {
    using LocalT = LocalTransitoryConfiguration<VertexState, AgentState>;

    const OccupancyIndex index(grid, current.locmap);
    std::vector<LocalT> locals(grid.vertex_count());

    // Vertices without agents keep their state; only occupied ones need delta.
    std::vector<std::size_t> occupied;
    for (std::size_t i = 0; i < grid.vertex_count(); ++i) {
        if (index.agents_at(i).empty()) {
            locals[i].sv = current.svmap[i];
        } else {
            occupied.push_back(i);
        }
    }

    auto evaluate = [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            const std::size_t i = occupied[k];
            const NeighborhoodView<VertexState, AgentState> view(grid, current, index, grid.vertex(i),
                                                                  options.radius);
            locals[i] = delta(view, alpha, rule, rng, round);
        }
    };

    const std::size_t workers = std::min<std::size_t>(std::max(1u, options.threads), occupied.size());
    if (workers <= 1) {
        evaluate(0, occupied.size());
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        const std::size_t chunk = (occupied.size() + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t begin = w * chunk;
            const std::size_t end = std::min(occupied.size(), begin + chunk);
            if (begin >= end) break;
            pool.emplace_back([&, begin, end] { evaluate(begin, end); });
        }
    }

    return move(merge_transitory<VertexState, AgentState>(grid, locals));
}

enum class StopReason { Converged, RoundCap };

template <class VertexState, class AgentState>
struct RunResult {
    GlobalConfiguration<VertexState, AgentState> configuration;
    std::uint64_t rounds = 0;
    StopReason reason = StopReason::RoundCap;
};

/// Steps from C_0 until stop(config, round) holds (checked before each
/// round, so rounds counts executed steps) or max_rounds is reached.
template <class VertexState, class AgentState, class Alpha, class Stop, class Rule = LowestIdRule>
RunResult<VertexState, AgentState>
run(const GridSpec& grid, GlobalConfiguration<VertexState, AgentState> initial, Alpha&& alpha,
    const RngPolicy& rng, Stop&& stop, std::uint64_t max_rounds, const StepOptions& options = {},
    Rule&& rule = {}) {
    RunResult<VertexState, AgentState> result;
    result.configuration = std::move(initial);
    for (std::uint64_t round = 0;; ++round) {
        if (stop(std::as_const(result.configuration), round)) {
            result.rounds = round;
            result.reason = StopReason::Converged;
            return result;
        }
        if (round >= max_rounds) {
            result.rounds = round;
            result.reason = StopReason::RoundCap;
            return result;
        }
        result.configuration = step(grid, result.configuration, alpha, rng, round, options, rule);
    }
}

} // namespace geoswarm
