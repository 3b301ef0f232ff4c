#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace strata {

struct VerifyResult {
    std::string suite;
    bool passed = false;
    std::string summary;             // human-readable, one block per check
    nlohmann::ordered_json details;  // machine-readable
};

// Exact-enumeration checks of the permutation-perturbation properties on
// layouts [2], [3], [2,3] and, when max_stratum >= 4, [4] and [2,4].
VerifyResult verify_coupling(int max_stratum);

// Sampling-uniformity goodness of fit: swap frequency on a pair stratum and
// a full chi-squared test over all 12 permutations of layout [3,2].
VerifyResult verify_uniformity(std::uint64_t seed);

// Score-function constants: finite-sample normal-score variances, the
// reference integrals by midpoint quadrature, and the Riemann-sum
// domination up to stratum size 1000.
VerifyResult verify_scores();

// Sampling-variance identity and enumerated sampling moments for random
// finite populations.
VerifyResult verify_finite_pop(std::uint64_t seed);

// Runs the named suite ("coupling" | "uniformity" | "scores" | "finite-pop"
// | "all") and aggregates.
VerifyResult run_verify_suite(const std::string& suite, int max_stratum, std::uint64_t seed);

}  // namespace strata
