#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace gexp::montecarlo {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of the independent stream for one path. Paths never share a stream,
/// so results do not depend on how paths are split across workers.
inline std::uint64_t path_seed(std::uint64_t seed, std::uint64_t path) noexcept
{
    return splitmix64(seed ^ splitmix64(path + 0x632be59bd9b4e019ULL));
}

/// SplitMix64 as a counter-based engine: draw n is splitmix64(key + n * golden),
/// so any draw of any path can be recomputed from (seed, path, n) alone.
class CounterEngine {
public:
    using result_type = std::uint64_t;

    explicit CounterEngine(std::uint64_t key) noexcept : state_(key) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }
    result_type operator()() noexcept
    {
        const std::uint64_t s = state_;
        state_ += 0x9e3779b97f4a7c15ULL;
        return splitmix64(s);
    }

private:
    std::uint64_t state_;
};

/// Fills `out` with independent N(0, variance) draws for one path.
inline void gaussian_stream(std::uint64_t seed, std::uint64_t path, double variance,
                            std::span<double> out)
{
    CounterEngine engine(path_seed(seed, path));
    std::normal_distribution<double> normal(0.0, 1.0);
    const double scale = std::sqrt(variance);
    for (double& v : out) {
        v = scale * normal(engine);
    }
}

} // namespace gexp::montecarlo
