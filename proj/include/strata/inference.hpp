#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "strata/dataset.hpp"
#include "strata/statistics.hpp"

namespace strata {

enum class TestMode { asymptotic, monte_carlo, exact };
enum class ARVariant { star, legacy };

struct TestOptions {
    TestMode mode = TestMode::asymptotic;
    int replications = 999;       // Monte Carlo draws
    std::uint64_t seed = 0;
    TiePolicy tie_policy = TiePolicy::random;
    int threads = 1;
    std::uint64_t enumeration_cap = 1'000'000;
    int min_effective_size = 30;  // warning threshold for asymptotic mode
};

struct McPValue {
    double p = 1.0;
    int replications = 0;
    std::uint64_t seed = 0;
};

struct TestReport {
    std::string method;  // "IR-normal" | "AM-chi2-star" | "AM-chi2-legacy"
    double beta0 = 0.0;
    double statistic = 0.0;
    std::optional<double> p_asymptotic;
    std::optional<McPValue> p_mc;
    std::optional<double> p_exact;
    nlohmann::ordered_json diagnostics;
    std::vector<std::string> warnings;

    nlohmann::ordered_json to_json() const;
    std::string to_csv() const;  // header line + one flat row
};

// Score cross-product permutation test of beta = beta0. The response scores
// come from y - beta0 * d, the instrument scores from the observed single
// instrument column; Monte Carlo / exact modes re-randomize the instrument
// scores within strata. Asymptotic p is two-sided normal on the standardized
// statistic.
TestReport ir_test(const StratifiedDataset& data, double beta0, const ScoreSpec& response_score,
                   const ScoreSpec& iv_score, const TestOptions& opts);

// Rank Anderson-Rubin chi-squared test of beta = beta0 with k >= 1
// instruments; `variant` picks the covariance estimator the statistic
// inverts (both are always reported). Monte Carlo mode permutes the rank
// scores within strata holding the instruments fixed.
TestReport am_test(const StratifiedDataset& data, double beta0, const ScoreSpec& score,
                   ARVariant variant, const TestOptions& opts);

struct EmpiricalDistribution {
    std::vector<double> sorted;  // ascending

    double quantile(double p) const;
    // Kolmogorov-Smirnov distance to the standard normal cdf.
    double ks_vs_std_normal() const;
    // (1 + #{draws >= observed}) / (B + 1)
    double add_one_p_geq(double observed) const;
};

// B independent draws of statistic(pi) under uniform stratified permutations.
// Draw i uses the generator master.child(i), so the result is reproducible
// for a given master key and invariant to the thread count.
EmpiricalDistribution mc_null_distribution(
    const std::function<double(const StratifiedPermutation&)>& statistic,
    const StrataLayout& layout, int replications, const Rng& master, int threads = 1);

}  // namespace strata
