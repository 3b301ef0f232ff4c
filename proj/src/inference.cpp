#include "strata/inference.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "strata/parallel.hpp"
#include "strata/special_functions.hpp"

namespace strata {

namespace {

nlohmann::ordered_json lindeberg_json(const CltDiagnostics& d) {
    nlohmann::ordered_json out = nlohmann::ordered_json::object();
    for (auto [eps, value] : d.lindeberg) {
        out[nlohmann::json(eps).dump()] = value;
    }
    return out;
}

nlohmann::ordered_json matrix_json(const Matrix& m) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (int r = 0; r < m.rows; ++r) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (int c = 0; c < m.cols; ++c) row.push_back(m.at(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<double> response_minus_dose(const StratifiedDataset& data, double beta0) {
    std::span<const double> y = data.response();
    std::span<const double> d = data.dose();
    std::vector<double> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] - beta0 * d[i];
    return out;
}

void warn_small_effective_size(const StratifiedDataset& data, const TestOptions& opts,
                               TestReport& report) {
    int effective = data.n() - data.layout().strata();
    if (effective < opts.min_effective_size) {
        report.warnings.push_back(
            "effective sample size n-S = " + std::to_string(effective) + " is below " +
            std::to_string(opts.min_effective_size) + "; the normal/chi-squared "
            "approximation may be poor, consider mc or exact mode");
    }
}

}  // namespace

EmpiricalDistribution mc_null_distribution(
    const std::function<double(const StratifiedPermutation&)>& statistic,
    const StrataLayout& layout, int replications, const Rng& master, int threads) {
    if (replications < 1) raise(ErrorCode::domain, "mc_null_distribution: need B >= 1");
    EmpiricalDistribution dist;
    dist.sorted.resize(replications);
    parallel_for(0, replications, threads, [&](int i) {
        Rng rng = master.child(static_cast<std::uint64_t>(i));
        StratifiedPermutation pi = sample_permutation(layout, rng);
        dist.sorted[i] = statistic(pi);
    });
    std::sort(dist.sorted.begin(), dist.sorted.end());
    return dist;
}

double EmpiricalDistribution::quantile(double p) const {
    if (sorted.empty()) raise(ErrorCode::domain, "quantile of empty distribution");
    if (!(p >= 0.0 && p <= 1.0)) raise(ErrorCode::domain, "quantile: p outside [0,1]");
    double pos = p * (sorted.size() - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= sorted.size()) return sorted.back();
    double frac = pos - lo;
    return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

double EmpiricalDistribution::ks_vs_std_normal() const {
    double worst = 0.0;
    double n = static_cast<double>(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        double cdf = std_normal_cdf(sorted[i]);
        worst = std::max(worst, std::abs((i + 1) / n - cdf));
        worst = std::max(worst, std::abs(cdf - i / n));
    }
    return worst;
}

double EmpiricalDistribution::add_one_p_geq(double observed) const {
    auto it = std::lower_bound(sorted.begin(), sorted.end(), observed);
    std::size_t count = static_cast<std::size_t>(sorted.end() - it);
    return (1.0 + static_cast<double>(count)) / (sorted.size() + 1.0);
}

TestReport ir_test(const StratifiedDataset& data, double beta0, const ScoreSpec& response_score,
                   const ScoreSpec& iv_score, const TestOptions& opts) {
    const StrataLayout& layout = data.layout();
    Rng rng(opts.seed);
    Rng tie_rng = rng.child(~0ull);  // reserved stream, clear of the mc draw indices
    std::vector<double> residual = response_minus_dose(data, beta0);
    std::vector<double> q =
        build_scores(residual, layout, response_score, opts.tie_policy, &tie_rng);
    std::vector<double> instrument = data.instrument_column();
    std::vector<double> rho =
        build_scores(instrument, layout, iv_score, opts.tie_policy, &tie_rng);

    IRStatistic observed = ir_statistic(q, rho, layout, StratifiedPermutation::identity(layout));

    TestReport report;
    report.method = "IR-normal";
    report.beta0 = beta0;
    report.statistic = observed.standardized;

    CenteredArray array = build_centered_array(q, rho, layout);
    CltDiagnostics diag = clt_diagnostics(array);
    report.diagnostics["sigma_n_sq"] = diag.sigma_sq;
    report.diagnostics["lindeberg"] = lindeberg_json(diag);
    report.diagnostics["lyapunov"] = diag.lyapunov;
    report.diagnostics["mu"] = observed.moments.mu;
    report.diagnostics["sigma_sq"] = observed.moments.sigma_sq;
    report.diagnostics["n_effective"] = observed.moments.n_effective;
    report.diagnostics["t_raw"] = observed.t;
    report.diagnostics["singleton_strata"] = diag.singleton_strata;

    double obs_dev = std::abs(observed.standardized);
    switch (opts.mode) {
        case TestMode::asymptotic: {
            warn_small_effective_size(data, opts, report);
            report.p_asymptotic = 2.0 * std_normal_cdf(-obs_dev);
            break;
        }
        case TestMode::monte_carlo: {
            double mu = observed.moments.mu;
            double sigma = std::sqrt(observed.moments.sigma_sq);
            EmpiricalDistribution dist = mc_null_distribution(
                [&](const StratifiedPermutation& pi) {
                    return std::abs(ir_t(q, rho, layout, pi) - mu) / sigma;
                },
                layout, opts.replications, rng, opts.threads);
            report.p_mc = McPValue{dist.add_one_p_geq(obs_dev), opts.replications, opts.seed};
            break;
        }
        case TestMode::exact: {
            double mu = observed.moments.mu;
            std::uint64_t hits = 0, total = 0;
            double obs_abs = std::abs(observed.t - mu);
            for_each_permutation(
                layout,
                [&](const StratifiedPermutation& pi) {
                    total += 1;
                    if (std::abs(ir_t(q, rho, layout, pi) - mu) >= obs_abs) hits += 1;
                },
                opts.enumeration_cap);
            report.p_exact = static_cast<double>(hits) / static_cast<double>(total);
            break;
        }
    }
    return report;
}

TestReport am_test(const StratifiedDataset& data, double beta0, const ScoreSpec& score,
                   ARVariant variant, const TestOptions& opts) {
    const StrataLayout& layout = data.layout();
    if (data.instrument_dim() < 1) {
        raise(ErrorCode::dimension, "am_test: dataset has no instrument columns");
    }
    Rng rng(opts.seed);
    Rng tie_rng = rng.child(~0ull);  // reserved stream, clear of the mc draw indices
    std::vector<double> residual = response_minus_dose(data, beta0);
    RankVector ranks = ranks_within_strata(residual, layout, opts.tie_policy, &tie_rng);

    Matrix z(data.n(), data.instrument_dim());
    std::copy(data.instruments().begin(), data.instruments().end(), z.data.begin());
    RankARComponents comp = rank_ar_components(z, ranks, score, layout);

    TestReport report;
    report.method = variant == ARVariant::star ? "AM-chi2-star" : "AM-chi2-legacy";
    report.beta0 = beta0;
    report.statistic = variant == ARVariant::star ? comp.b_star : comp.b;
    report.diagnostics["A_n"] = comp.a;
    report.diagnostics["Omega"] = matrix_json(comp.omega);
    report.diagnostics["Omega_star"] = matrix_json(comp.omega_star);
    report.diagnostics["B_n"] = comp.b;
    report.diagnostics["B_star"] = comp.b_star;
    report.diagnostics["lambda_min"] =
        variant == ARVariant::star ? comp.lambda_min_star : comp.lambda_min;
    report.diagnostics["score"] = score.name();
    report.diagnostics["singleton_strata"] = layout.singleton_count();
    if (ranks.had_ties) report.warnings.push_back("tied residuals broken at random");

    switch (opts.mode) {
        case TestMode::asymptotic: {
            warn_small_effective_size(data, opts, report);
            report.p_asymptotic = chi2_sf(report.statistic, comp.k);
            break;
        }
        case TestMode::monte_carlo: {
            // permute the rank scores within strata, instruments held fixed
            Matrix zt = demean_columns(z, layout);
            std::vector<double> scores = score_transform(ranks, layout, score);
            std::vector<double> table_var(layout.strata(), 0.0);
            for (int s = 0; s < layout.strata(); ++s) {
                if (layout.size(s) >= 2) table_var[s] = score_table_variance(layout.size(s), score);
            }
            double integral_var = score.integral_variance();
            EmpiricalDistribution dist = mc_null_distribution(
                [&](const StratifiedPermutation& pi) {
                    std::vector<double> permuted(scores.size());
                    for (int s = 0; s < layout.strata(); ++s) {
                        int off = layout.offset(s);
                        for (int i = 0; i < layout.size(s); ++i) {
                            permuted[off + i] = scores[off + pi.image(s, i)];
                        }
                    }
                    RankARComponents c = rank_ar_from_scores(zt, permuted, integral_var,
                                                             table_var, layout);
                    return variant == ARVariant::star ? c.b_star : c.b;
                },
                layout, opts.replications, rng, opts.threads);
            report.p_mc =
                McPValue{dist.add_one_p_geq(report.statistic), opts.replications, opts.seed};
            break;
        }
        case TestMode::exact:
            raise(ErrorCode::usage, "am_test: exact enumeration mode is not provided; use mc");
    }
    return report;
}

nlohmann::ordered_json TestReport::to_json() const {
    nlohmann::ordered_json j;
    j["method"] = method;
    j["beta0"] = beta0;
    j["statistic"] = statistic;
    if (p_asymptotic) j["p_asymptotic"] = *p_asymptotic;
    if (p_mc) {
        j["p_mc"] = {{"p", p_mc->p},
                     {"replications", p_mc->replications},
                     {"seed", p_mc->seed}};
    }
    if (p_exact) j["p_exact"] = *p_exact;
    j["diagnostics"] = diagnostics;
    j["warnings"] = warnings;
    return j;
}

std::string TestReport::to_csv() const {
    std::ostringstream out;
    out.precision(17);
    out << "method,beta0,statistic,p_asymptotic,p_mc,mc_replications,seed,p_exact\n";
    out << method << ',' << beta0 << ',' << statistic << ',';
    if (p_asymptotic) out << *p_asymptotic;
    out << ',';
    if (p_mc) out << p_mc->p;
    out << ',';
    if (p_mc) out << p_mc->replications;
    out << ',';
    if (p_mc) out << p_mc->seed;
    out << ',';
    if (p_exact) out << *p_exact;
    out << '\n';
    return out.str();
}

}  // namespace strata
