#pragma once

#include <cstdint>
#include <random>

namespace qrepsim {

// Mixes a 64-bit word with the SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Seed of trial `trial` in grid cell `cell`. Depends only on the indices, so a
// trial reproduces regardless of which worker runs it or in what order.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t cell, std::uint64_t trial) {
    return mix64(mix64(mix64(master) ^ cell) ^ trial);
}

// Per-trial stream of uniform reals. std::mt19937_64 output is fixed by the
// standard, and the integer-to-double map below avoids the
// implementation-defined std::uniform_real_distribution, so a seed yields the
// same draws on every platform.
class TrialRng {
public:
    explicit TrialRng(std::uint64_t seed) : engine_(seed) {}

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

// True with probability p. Consumes exactly one draw.
inline bool random_success(TrialRng& rng, double p) { return rng.uniform() < p; }

}  // namespace qrepsim
