#pragma once

#include <span>
#include <vector>

#include "strata/layout.hpp"

namespace strata {

// Per-stratum doubly-centered score arrays: every row sum and column sum
// vanishes within each stratum. Two representations:
//   dense   - explicit ns x ns blocks
//   product - entry(i,j) = u[i] * w[j] with u, w demeaned per stratum, which
//             is centered exactly by construction and never materialized
//             unless asked.
class CenteredArray {
public:
    // Dense blocks, row-major per stratum. Validates the centering condition:
    // |row/col sums| <= rel_tol * max|entry|.
    static CenteredArray dense(const StrataLayout& layout,
                               std::vector<std::vector<double>> blocks,
                               double rel_tol = 1e-10);

    // Product form from already-demeaned factors (asserted, not re-centered).
    static CenteredArray product(const StrataLayout& layout, std::vector<double> u,
                                 std::vector<double> w);

    const StrataLayout& layout() const { return layout_; }
    bool is_product() const { return product_; }

    double entry(int s, int i, int j) const;
    double max_abs() const { return max_abs_; }

    std::span<const double> row_factor(int s) const;   // u restricted to stratum s
    std::span<const double> col_factor(int s) const;   // w restricted to stratum s
    const std::vector<double>& dense_block(int s) const;

    // Dense copy of this array (product form materialized); strata larger
    // than max_stratum_size are rejected (quadratic memory).
    CenteredArray materialize_dense(int max_stratum_size = 512) const;

private:
    explicit CenteredArray(const StrataLayout& layout) : layout_(layout) {}

    StrataLayout layout_;
    bool product_ = false;
    std::vector<std::vector<double>> blocks_;  // dense form
    std::vector<double> u_, w_;                // product form
    double max_abs_ = 0.0;
};

// Subtracts the stratum mean from each entry; per-stratum means of the result
// are zero to machine precision.
std::vector<double> demean_within_strata(std::span<const double> v, const StrataLayout& layout);

// Product-form array from raw scores: entry(i,j) = (b_i - mean_s b)(c_j - mean_s c).
CenteredArray build_centered_array(std::span<const double> b, std::span<const double> c,
                                   const StrataLayout& layout);

}  // namespace strata
