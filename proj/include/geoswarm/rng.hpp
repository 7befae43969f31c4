#pragma once

#include <cstdint>
#include <limits>

namespace geoswarm {

/// splitmix64 finaliser; a bijective 64-bit mix.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Small counter-based generator (splitmix64 sequence). Satisfies
/// UniformRandomBitGenerator so it can also drive <random> distributions.
class RngStream {
public:
    using result_type = std::uint64_t;

    constexpr explicit RngStream(std::uint64_t key) noexcept : state_(key) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53 random bits.
    constexpr double uniform() noexcept {
        return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    }

    constexpr bool bernoulli(double p) noexcept { return uniform() < p; }

    /// Uniform integer in [0, bound). bound must be positive.
    constexpr std::uint64_t below(std::uint64_t bound) noexcept {
        // Lemire's multiply-shift with rejection.
        while (true) {
            const unsigned __int128 product =
                static_cast<unsigned __int128>((*this)()) * static_cast<unsigned __int128>(bound);
            const auto low = static_cast<std::uint64_t>(product);
            if (low >= bound || low >= (0 - bound) % bound) {
                return static_cast<std::uint64_t>(product >> 64);
            }
        }
    }

private:
    std::uint64_t state_;
};

/// Derives one independent stream per (seed, round, vertex, rank-in-vertex).
/// The key depends only on those four values, never on evaluation order.
struct RngPolicy {
    std::uint64_t seed = 0;

    constexpr RngStream stream(std::uint64_t round, std::uint64_t vertex_index,
                               std::uint64_t agent_rank) const noexcept {
        std::uint64_t key = mix64(seed ^ 0x5851f42d4c957f2dULL);
        key = mix64(key ^ round);
        key = mix64(key ^ vertex_index);
        key = mix64(key ^ agent_rank);
        return RngStream(key);
    }

    /// Stream outside the round structure (initial placement and such).
    constexpr RngStream auxiliary(std::uint64_t purpose) const noexcept {
        return RngStream(mix64(mix64(seed ^ 0xa0761d6478bd642fULL) ^ purpose));
    }
};

} // namespace geoswarm
