#pragma once

#include <array>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "strata/centered_array.hpp"
#include "strata/linalg.hpp"
#include "strata/permutation.hpp"
#include "strata/scores.hpp"

namespace strata {

inline constexpr double kEigFloor = 1e-10;
inline constexpr std::array<double, 4> kLindebergGrid{0.01, 0.05, 0.1, 0.5};

// --- combinatorial statistic and its CLT diagnostics ------------------------

// sum_s (ns-1)^{-1} sum_{ij} entry(s,i,j)^2 over strata with ns >= 2.
double stratified_sigma_sq(const CenteredArray& a);

// Truncated second-moment sum at threshold eps:
//   sigma^{-2} sum_s ns^{-1} sum_{ij} a_ij^2 1(|a_ij|/sigma > eps).
double lindeberg_sum(const CenteredArray& a, double sigma_sq, double eps);

// Moment form: sigma^{-(2+delta)} sum_s ns^{-1} sum_{ij} |a_ij|^{2+delta}.
double lyapunov_sum(const CenteredArray& a, double sigma_sq, double delta);

struct CltDiagnostics {
    double sigma_sq = 0.0;
    std::vector<std::pair<double, double>> lindeberg;  // (eps, sum), eps ascending
    double lyapunov_delta = 1.0;
    double lyapunov = 0.0;
    // product representation only: the factorized-variance, third-moment and
    // fourth-moment sums used as vanishing-criterion diagnostics
    std::optional<std::array<double, 3>> product_terms;
    int singleton_strata = 0;
};

CltDiagnostics clt_diagnostics(const CenteredArray& a,
                               std::span<const double> eps_grid = kLindebergGrid,
                               double delta = 1.0);

// sum_s sum_i entry(s, i, pi_s(i)).
double diagonal_sum(const CenteredArray& a, const StratifiedPermutation& pi);

// Standardized: diagonal_sum / sqrt(stratified_sigma_sq). Throws
// Error(degenerate) when the variance vanishes.
double t_statistic(const CenteredArray& a, const StratifiedPermutation& pi);

// --- multivariate covariance (vector row scores) -----------------------------

// Covariance of n^{-1/2} sum_s sum_i btilde_si ctilde_{s pi(i)}:
//   n^{-1} sum_{s: ns>=2} (ns-1)^{-1} (sum_i btilde btilde') (sum_j ctilde^2).
// b is n x k with k >= 1. Symmetric positive semidefinite.
Matrix permutation_covariance(const Matrix& b, std::span<const double> c,
                              const StrataLayout& layout);

// Product array for one direction t: entry = (t' S^{-1/2} btilde)_i ctilde_j / sqrt(n)
// with S = permutation_covariance(b, c). Its sigma_sq equals |t|^2.
CenteredArray directional_array(const Matrix& b, std::span<const double> c,
                                const StrataLayout& layout, std::span<const double> t,
                                double min_eig_floor = kEigFloor);

// --- score cross-product statistic with exact permutation moments -----------

struct IRMoments {
    double mu = 0.0;        // E_pi[T] = sum_s ns qbar_s rhobar_s (all strata)
    double sigma_sq = 0.0;  // Var_pi[T], strata with ns >= 2 only
    int n_effective = 0;    // n minus the number of singleton strata
};

IRMoments ir_moments(std::span<const double> q, std::span<const double> rho,
                     const StrataLayout& layout);

// T = sum_s sum_i q_si rho_{s pi(i)}.
double ir_t(std::span<const double> q, std::span<const double> rho, const StrataLayout& layout,
            const StratifiedPermutation& pi);

struct IRStatistic {
    double t = 0.0;
    double standardized = 0.0;
    IRMoments moments;
};

// Throws Error(degenerate) when the permutation variance vanishes.
IRStatistic ir_statistic(std::span<const double> q, std::span<const double> rho,
                         const StrataLayout& layout, const StratifiedPermutation& pi);

// --- rank Anderson-Rubin statistic (two covariance estimators) --------------

struct RankARComponents {
    int k = 0;
    std::vector<double> a;   // n^{-1} sum_s sum_i ztilde_si phi(R_si/(ns+1))
    Matrix omega;            // integral score variance (large-stratum form)
    Matrix omega_star;       // exact finite-sample score variance per stratum
    double b = 0.0;          // n a' omega^{-1} a
    double b_star = 0.0;     // n a' omega_star^{-1} a
    double lambda_min = 0.0;
    double lambda_min_star = 0.0;
};

// Core computation with caller-supplied scores: `scores` holds the per-unit
// transformed values, `integral_var` the reference variance of the score
// function, `table_var[s]` the finite-sample score variance in stratum s
// (ignored for ns < 2).
RankARComponents rank_ar_from_scores(const Matrix& ztilde, std::span<const double> scores,
                                     double integral_var, std::span<const double> table_var,
                                     const StrataLayout& layout,
                                     double min_eig_floor = kEigFloor);

RankARComponents rank_ar_components(const Matrix& z, const RankVector& ranks,
                                    const ScoreSpec& spec, const StrataLayout& layout,
                                    double min_eig_floor = kEigFloor);

// Column-wise within-stratum demeaning of an n x k matrix.
Matrix demean_columns(const Matrix& m, const StrataLayout& layout);

// --- finite-population sampling bridge ---------------------------------------

struct FinitePopBridge {
    StrataLayout layout;              // population strata (sizes ns)
    std::vector<double> y;            // population values, stratum-contiguous
    std::vector<int> sampled;         // n1s per stratum
    double ybar = 0.0;                // population mean
    double v_sq = 0.0;                // weighted sampling variance
    std::vector<double> b, c;         // embedded row/column scores (raw)
    double sigma_sq = 0.0;            // from the embedded product array
    bool degenerate = false;          // v_sq == 0
};

// Embeds without-replacement stratified sampling into the permutation frame:
// b_si = 1/n1s for the first n1s slots else 0, c_sj = (ns/n) y_sj. The
// resulting sigma_sq provably equals v_sq; the constructor verifies the
// identity to 1e-12 relative and fails internally otherwise.
FinitePopBridge finite_pop_bridge(const std::vector<std::vector<double>>& y,
                                  const std::vector<int>& n1);

CenteredArray fp_embedded_array(const FinitePopBridge& bridge);

// Weighted sample mean and variance estimate for given sampling indicators
// (exactly n1s ones per stratum).
std::pair<double, double> fp_sample_stats(const std::vector<std::vector<double>>& y,
                                          const std::vector<int>& n1,
                                          std::span<const std::uint8_t> indicators);

// Sampling-theory Lindeberg sum rewritten in permutation terms; dominates
// lindeberg_sum on the embedded array term by term.
double fp_lindeberg_sum(const FinitePopBridge& bridge, double eps);

}  // namespace strata
