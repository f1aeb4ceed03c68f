#pragma once

#include <cstdint>
#include <random>

namespace blockcorr::rng {

using Engine = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Stateless seed derivation: derive(seed, a, b, ...) is a pure function of its
/// arguments, so streams keyed by (realization, user, slot) do not depend on
/// the order in which they are consumed.
constexpr std::uint64_t derive(std::uint64_t seed) noexcept { return splitmix64(seed); }

template <class... Rest>
constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t key, Rest... rest) noexcept {
    return derive(splitmix64(seed ^ splitmix64(key + 0x632be59bd9b4e019ULL)), static_cast<std::uint64_t>(rest)...);
}

/// Uniform on [0, 1) from the top 53 bits.
constexpr double to_unit(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Stream tags for the independent engines of one realization.
inline constexpr std::uint64_t kPopulationStream = 1;
inline constexpr std::uint64_t kFieldStream = 2;
inline constexpr std::uint64_t kTrajectoryStream = 3;
inline constexpr std::uint64_t kActivityStream = 4;
inline constexpr std::uint64_t kFadingStream = 5;

} // namespace blockcorr::rng
