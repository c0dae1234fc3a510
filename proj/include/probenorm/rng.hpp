#pragma once

#include <cstdint>

namespace probenorm {

// Deterministic random stream with a fixed cross-platform bit layout.
// Standard-library distributions are implementation-defined, which would
// break byte-identical result files, so both the generator (SplitMix64)
// and the uniform/normal transforms are spelled out here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64();

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform();

    // Uniform in [lo, hi).
    double uniform(double lo, double hi);

    // Standard normal via Box-Muller; pairs are cached, no rejection loop.
    double normal();

private:
    std::uint64_t state_;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

// Mixes a master seed with up to two stream indices so that every
// (cell, repeat) pair in a batch owns an independent, reproducible stream.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0);

}  // namespace probenorm
