#pragma once

#include <cstdint>
#include <random>

namespace garma {

/// Generator used by every stochastic component.
using Rng = std::mt19937_64;

/// One step of the splitmix64 mixer.
[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/**
 * @brief Child seed for stream `index` of a master seed.
 *
 * derive_seed(master, i) = splitmix64(master XOR i). Replication i of a
 * Monte Carlo run can be reproduced alone from (master, i).
 */
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return splitmix64(master ^ index);
}

}  // namespace garma
