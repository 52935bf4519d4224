#pragma once

// SplitMix64: a counter-based 64-bit generator (Steele, Lea & Flood's
// splittable mix). Output i of stream s is mix(seed ^ mix(s) + i*GAMMA), so
// replicas get independent streams by construction and results are
// reproducible bit-for-bit across thread counts.

#include <cstdint>

namespace midmarket {

struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0,1) with 53 random bits
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n)
    std::uint64_t below(std::uint64_t n) {
        // multiply-shift; bias < 2^-64 * n, negligible for n << 2^64
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }
};

// Derived seed for a named replica/stream of a master seed.
inline std::uint64_t split_stream(std::uint64_t seed, std::uint64_t stream) {
    return SplitMix64::mix(seed ^ SplitMix64::mix(stream ^ 0xA3C59AC2ull));
}

}  // namespace midmarket
