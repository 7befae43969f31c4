#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>

#include "geoswarm/errors.hpp"

namespace geoswarm {

enum class Topology { Bounded, Toroidal };

enum class Direction : std::uint8_t { R, L, U, D, S };

inline constexpr std::array<Direction, 5> kAllDirections{
    Direction::R, Direction::L, Direction::U, Direction::D, Direction::S};

char to_char(Direction d) noexcept;

struct Vertex {
    int x = 0;
    int y = 0;

    friend constexpr bool operator==(Vertex, Vertex) = default;
    friend constexpr auto operator<=>(Vertex, Vertex) = default;
};

std::ostream& operator<<(std::ostream& os, Vertex v);

/// Rectangular n x m grid graph with 4-neighbour edges and a self-loop at
/// every vertex. x is the column in [0, n), y is the row in [0, m).
struct GridSpec {
    int n = 1;
    int m = 1;
    Topology topology = Topology::Bounded;

    std::size_t vertex_count() const noexcept {
        return static_cast<std::size_t>(n) * static_cast<std::size_t>(m);
    }

    bool contains(Vertex v) const noexcept { return v.x >= 0 && v.x < n && v.y >= 0 && v.y < m; }

    std::size_t index(Vertex v) const noexcept {
        return static_cast<std::size_t>(v.y) * static_cast<std::size_t>(n) +
               static_cast<std::size_t>(v.x);
    }

    Vertex vertex(std::size_t index) const noexcept {
        return {static_cast<int>(index % static_cast<std::size_t>(n)),
                static_cast<int>(index / static_cast<std::size_t>(n))};
    }

    /// Resolves an offset from v to a vertex: clipped (nullopt) on bounded
    /// grids, wrapped on toroidal ones.
    std::optional<Vertex> offset(Vertex v, int dx, int dy) const noexcept;

    void validate() const;

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

constexpr Vertex step_delta(Direction d) noexcept {
    switch (d) {
    case Direction::R: return {1, 0};
    case Direction::L: return {-1, 0};
    case Direction::U: return {0, 1};
    case Direction::D: return {0, -1};
    case Direction::S: break;
    }
    return {0, 0};
}

/// True when moving from v in direction d stays on the grid.
bool is_applicable(const GridSpec& grid, Vertex v, Direction d) noexcept;

/// Target of the edge leaving v in direction d. Throws InvalidMove when a
/// bounded grid would be exited.
Vertex apply_direction(const GridSpec& grid, Vertex v, Direction d);

/// Direction of the edge source -> target, or nullopt if it is not a grid edge.
std::optional<Direction> direction_between(const GridSpec& grid, Vertex source, Vertex target) noexcept;

} // namespace geoswarm
