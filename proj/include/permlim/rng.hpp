#ifndef PERMLIM_RNG_HPP
#define PERMLIM_RNG_HPP

#include <cstdint>
#include <random>

namespace permlim {

using Rng = std::mt19937_64;

/// Default seed used whenever a caller does not supply one.
inline constexpr std::uint64_t kDefaultSeed = 20131011;

/// Two-sided 99% normal quantile.
inline constexpr double kZ99 = 2.5758293035489004;

/// Seed for shard `index` derived from a run seed (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index)
{
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Uniform double in [0,1) with 53 random bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform integer in [0, bound).
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t bound)
{
    return std::uniform_int_distribution<std::uint64_t>{0, bound - 1}(rng);
}

}  // namespace permlim

#endif
