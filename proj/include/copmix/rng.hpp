// Counter-based uniform random stream (splitmix64).
//
// Every draw is a pure function of (seed, counter), so paths are bit-exact
// reproducible across platforms and runs.  The algorithm name is recorded in
// path provenance by the simulation layer.

#pragma once

#include <cstdint>

namespace copmix {

class UniformStream {
public:
    explicit UniformStream(std::uint64_t seed) noexcept : state_(seed) {}

    // Next uniform draw in [0, 1), 53 mantissa bits.
    double next() noexcept { return to_unit(next_u64()); }

    std::uint64_t next_u64() noexcept {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static constexpr const char* algorithm() noexcept { return "splitmix64"; }

private:
    static double to_unit(std::uint64_t z) noexcept {
        return static_cast<double>(z >> 11) * 0x1.0p-53;
    }

    std::uint64_t state_;
};

} // namespace copmix
