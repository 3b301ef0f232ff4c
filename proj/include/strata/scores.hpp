#pragma once

#include <span>
#include <string>
#include <vector>

#include "strata/layout.hpp"
#include "strata/rng.hpp"

namespace strata {

enum class ScoreKind {
    wilcoxon,  // phi(x) = x
    normal,    // phi(x) = standard normal quantile (van der Waerden)
    identity,  // raw values pass through untouched (no rank transform)
};

struct ScoreSpec {
    ScoreKind kind = ScoreKind::wilcoxon;

    double phi(double x) const;
    // integral of (phi - mean phi)^2 over (0,1): 1/12 for wilcoxon, 1 for
    // normal. Undefined for identity.
    double integral_variance() const;
    const char* name() const;
    static ScoreSpec parse(const std::string& name);
};

enum class TiePolicy {
    error_on_ties,
    random,  // tied values get a uniformly random strict ordering
};

// Within-stratum ranks, 1-based: rank[u] of v[u] among its stratum.
struct RankVector {
    std::vector<int> rank;
    bool had_ties = false;
};

// rng may be null only under TiePolicy::error_on_ties.
RankVector ranks_within_strata(std::span<const double> v, const StrataLayout& layout,
                               TiePolicy policy, Rng* rng);

// q[u] = phi(rank[u] / (ns + 1)).
std::vector<double> score_transform(const RankVector& ranks, const StrataLayout& layout,
                                    const ScoreSpec& spec);

// phi(i/(ns+1)) for i = 1..ns.
std::vector<double> score_table(int ns, const ScoreSpec& spec);

// (ns-1)^{-1} sum_i (phi_i - mean phi)^2 over the table above; the
// finite-sample counterpart of integral_variance().
double score_table_variance(int ns, const ScoreSpec& spec);

// Scores a data column: rank-transform + phi for wilcoxon/normal,
// identity passes the raw values through.
std::vector<double> build_scores(std::span<const double> values, const StrataLayout& layout,
                                 const ScoreSpec& spec, TiePolicy policy, Rng* rng);

}  // namespace strata
