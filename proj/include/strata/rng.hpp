#pragma once

#include <cstdint>

namespace strata {

// Seeded, splittable generator (xoshiro256++ core, SplitMix64 expansion).
// Every stochastic operation in the library takes one of these explicitly;
// there is no global generator. Child streams are derived from the
// construction key only, never from consumed state, so
// rng.child(i) is reproducible regardless of how much the parent has drawn.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    // Independent stream keyed by (this stream's key, index).
    Rng child(std::uint64_t index) const;

    std::uint64_t key() const { return key_; }

    std::uint64_t next_u64();

    // Uniform integer in [0, bound) by masked rejection; no modulo bias.
    std::uint64_t below(std::uint64_t bound);

    // Uniform double, strictly inside (0,1): 53-bit grid offset by half a step.
    double open01();

    // Standard normal via the quantile transform of open01().
    double normal();

    // Standard Cauchy as a ratio of independent normals.
    double cauchy();

    // Chi-squared with k degrees of freedom as a sum of squared normals.
    double chi_squared(int k);

private:
    std::uint64_t key_;
    std::uint64_t state_[4];
};

// Mixing function used for stream derivation (SplitMix64 finalizer chain).
std::uint64_t mix_seed(std::uint64_t key, std::uint64_t index);

}  // namespace strata
