#pragma once

#include <cstdint>

namespace circlab {

/// Counter-based stream: value k is splitmix64(seed + k), so draws are stateless and splittable.
struct CounterRng {
    std::uint64_t seed = 0;

    static std::uint64_t mix(std::uint64_t z)
    {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    std::uint64_t bits(std::uint64_t counter) const { return mix(seed + counter); }
    double uniform(std::uint64_t counter) const
    {
        return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
    }
    CounterRng split(std::uint64_t stream) const { return {mix(seed ^ mix(stream))}; }
};

} // namespace circlab
