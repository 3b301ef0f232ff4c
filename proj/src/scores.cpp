#include "strata/scores.hpp"

#include <algorithm>
#include <numeric>

#include "strata/special_functions.hpp"

namespace strata {

double ScoreSpec::phi(double x) const {
    switch (kind) {
        case ScoreKind::wilcoxon: return x;
        case ScoreKind::normal: return std_normal_quantile(x);
        case ScoreKind::identity: return x;
    }
    raise(ErrorCode::internal, "unknown score kind");
}

double ScoreSpec::integral_variance() const {
    switch (kind) {
        case ScoreKind::wilcoxon: return 1.0 / 12.0;
        case ScoreKind::normal: return 1.0;
        case ScoreKind::identity:
            raise(ErrorCode::domain, "identity scores have no reference score variance");
    }
    raise(ErrorCode::internal, "unknown score kind");
}

const char* ScoreSpec::name() const {
    switch (kind) {
        case ScoreKind::wilcoxon: return "wilcoxon";
        case ScoreKind::normal: return "normal";
        case ScoreKind::identity: return "identity";
    }
    return "?";
}

ScoreSpec ScoreSpec::parse(const std::string& name) {
    if (name == "wilcoxon") return {ScoreKind::wilcoxon};
    if (name == "normal") return {ScoreKind::normal};
    if (name == "identity") return {ScoreKind::identity};
    raise(ErrorCode::usage, "unknown score '" + name + "' (wilcoxon|normal|identity)");
}

RankVector ranks_within_strata(std::span<const double> v, const StrataLayout& layout,
                               TiePolicy policy, Rng* rng) {
    require_length(v.size(), layout, "ranks_within_strata");
    if (policy == TiePolicy::random && rng == nullptr) {
        raise(ErrorCode::domain, "random tie policy needs a generator");
    }
    RankVector out;
    out.rank.assign(v.size(), 0);
    std::vector<int> order;
    for (int s = 0; s < layout.strata(); ++s) {
        int off = layout.offset(s);
        int ns = layout.size(s);
        order.resize(ns);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return v[off + a] < v[off + b]; });
        // handle tied runs
        int i = 0;
        while (i < ns) {
            int j = i + 1;
            while (j < ns && v[off + order[j]] == v[off + order[i]]) ++j;
            if (j - i > 1) {
                out.had_ties = true;
                if (policy == TiePolicy::error_on_ties) {
                    raise(ErrorCode::ties, "tied values in stratum " + std::to_string(s + 1));
                }
                for (int a = j - i - 1; a > 0; --a) {
                    int b = static_cast<int>(rng->below(static_cast<std::uint64_t>(a) + 1));
                    std::swap(order[i + a], order[i + b]);
                }
            }
            i = j;
        }
        for (int r = 0; r < ns; ++r) out.rank[off + order[r]] = r + 1;
    }
    return out;
}

std::vector<double> score_transform(const RankVector& ranks, const StrataLayout& layout,
                                    const ScoreSpec& spec) {
    require_length(ranks.rank.size(), layout, "score_transform");
    std::vector<double> out(ranks.rank.size());
    for (int s = 0; s < layout.strata(); ++s) {
        int off = layout.offset(s);
        int ns = layout.size(s);
        for (int i = 0; i < ns; ++i) {
            out[off + i] = spec.phi(static_cast<double>(ranks.rank[off + i]) / (ns + 1));
        }
    }
    return out;
}

std::vector<double> score_table(int ns, const ScoreSpec& spec) {
    std::vector<double> table(ns);
    for (int i = 1; i <= ns; ++i) table[i - 1] = spec.phi(static_cast<double>(i) / (ns + 1));
    return table;
}

double score_table_variance(int ns, const ScoreSpec& spec) {
    if (ns < 2) raise(ErrorCode::domain, "score_table_variance needs ns >= 2");
    std::vector<double> t = score_table(ns, spec);
    double mean = 0.0;
    for (double x : t) mean += x;
    mean /= ns;
    double ss = 0.0;
    for (double x : t) ss += (x - mean) * (x - mean);
    return ss / (ns - 1);
}

std::vector<double> build_scores(std::span<const double> values, const StrataLayout& layout,
                                 const ScoreSpec& spec, TiePolicy policy, Rng* rng) {
    if (spec.kind == ScoreKind::identity) {
        require_length(values.size(), layout, "build_scores");
        return {values.begin(), values.end()};
    }
    RankVector ranks = ranks_within_strata(values, layout, policy, rng);
    return score_transform(ranks, layout, spec);
}

}  // namespace strata
