#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace mbdf {

// Distribution helpers built directly on the engine output. The standard
// <random> distributions are implementation-defined, which would make seeded
// runs differ between standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, bound), bound > 0. Rejection sampling, no modulo bias.
    std::uint64_t below(std::uint64_t bound);

    /// Standard normal via Box-Muller.
    double normal();

    /// `k` distinct indices from [0, n), ascending. Partial Fisher-Yates.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

private:
    std::mt19937_64 engine_;
};

/// SplitMix64 finalizer applied to seed + stream; used to derive independent
/// per-subsystem seeds from one global seed.
std::uint64_t derive_seed(std::uint64_t global_seed, std::uint64_t stream);

}  // namespace mbdf
