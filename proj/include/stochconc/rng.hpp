#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace stochconc {

/// SplitMix64 finalizer. Bijective 64-bit avalanche mix.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Seed of trial `index` under `master_seed`: mix64(master_seed XOR mix64(index + 1)).
///
/// Distinct indices give unrelated streams, and the value depends only on the
/// pair, so trials can be run in any order or on any thread.
constexpr std::uint64_t child_seed(std::uint64_t master_seed, std::uint64_t index) noexcept
{
    return mix64(master_seed ^ mix64(index + 1));
}

/// Counter-based generator: the i-th output is mix64(seed + (i + 1) * golden_gamma).
///
/// Normal variates use the Box-Muller transform (version 1 of the stream
/// format): each pair of uniforms (u1, u2) yields sqrt(-2 ln u1) * cos(2 pi u2)
/// followed by sqrt(-2 ln u1) * sin(2 pi u2).
class Rng {
public:
    static constexpr std::uint64_t golden_gamma = 0x9E3779B97F4A7C15ULL;

    explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next_u64() noexcept
    {
        state_ += golden_gamma;
        return mix64(state_);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1].
    double uniform_open_zero() noexcept
    {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    double normal() noexcept
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double radius = std::sqrt(-2.0 * std::log(uniform_open_zero()));
        const double angle = 2.0 * std::numbers::pi * uniform();
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace stochconc
