#include "geoswarm/grid.hpp"

#include <string>

namespace geoswarm {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::InvalidMove: return "InvalidMove";
    case ErrorCode::IncompatibleLocals: return "IncompatibleLocals";
    case ErrorCode::NoCandidateSites: return "NoCandidateSites";
    case ErrorCode::InvalidAgentState: return "InvalidAgentState";
    case ErrorCode::InvalidScenario: return "InvalidScenario";
    case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

char to_char(Direction d) noexcept {
    constexpr char names[] = {'R', 'L', 'U', 'D', 'S'};
    return names[static_cast<int>(d)];
}

std::ostream& operator<<(std::ostream& os, Vertex v) {
    return os << '(' << v.x << ',' << v.y << ')';
}

namespace {

int wrap(int value, int size) noexcept {
    const int r = value % size;
    return r < 0 ? r + size : r;
}

} // namespace

std::optional<Vertex> GridSpec::offset(Vertex v, int dx, int dy) const noexcept {
    Vertex w{v.x + dx, v.y + dy};
    if (topology == Topology::Toroidal) {
        return Vertex{wrap(w.x, n), wrap(w.y, m)};
    }
    if (!contains(w)) return std::nullopt;
    return w;
}

void GridSpec::validate() const {
    if (n < 1 || m < 1) {
        throw ModelError(ErrorCode::InvalidScenario,
                         "grid dimensions must be positive, got " + std::to_string(n) + "x" +
                             std::to_string(m));
    }
}

bool is_applicable(const GridSpec& grid, Vertex v, Direction d) noexcept {
    const Vertex delta = step_delta(d);
    return grid.offset(v, delta.x, delta.y).has_value();
}

Vertex apply_direction(const GridSpec& grid, Vertex v, Direction d) {
    const Vertex delta = step_delta(d);
    if (auto w = grid.offset(v, delta.x, delta.y)) return *w;
    throw ModelError(ErrorCode::InvalidMove, "direction " + std::string(1, to_char(d)) +
                                                 " exits the grid at (" + std::to_string(v.x) +
                                                 "," + std::to_string(v.y) + ")");
}

std::optional<Direction> direction_between(const GridSpec& grid, Vertex source,
                                           Vertex target) noexcept {
    // S is checked first so that a 1-wide toroidal axis maps to the self-loop.
    for (Direction d : {Direction::S, Direction::R, Direction::L, Direction::U, Direction::D}) {
        const Vertex delta = step_delta(d);
        if (auto w = grid.offset(source, delta.x, delta.y); w && *w == target) return d;
    }
    return std::nullopt;
}

} // namespace geoswarm
