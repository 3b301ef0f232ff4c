#include "strata/centered_array.hpp"

#include <algorithm>
#include <cmath>

namespace strata {

CenteredArray CenteredArray::dense(const StrataLayout& layout,
                                   std::vector<std::vector<double>> blocks, double rel_tol) {
    if (blocks.size() != static_cast<std::size_t>(layout.strata())) {
        raise(ErrorCode::dimension, "CenteredArray: need one block per stratum");
    }
    CenteredArray a(layout);
    a.blocks_ = std::move(blocks);
    for (int s = 0; s < layout.strata(); ++s) {
        std::size_t ns = static_cast<std::size_t>(layout.size(s));
        if (a.blocks_[s].size() != ns * ns) {
            raise(ErrorCode::dimension, "CenteredArray: stratum " + std::to_string(s + 1) +
                                            " block is not " + std::to_string(ns) + "x" +
                                            std::to_string(ns));
        }
        for (double v : a.blocks_[s]) a.max_abs_ = std::max(a.max_abs_, std::abs(v));
    }
    double tol = rel_tol * a.max_abs_;
    for (int s = 0; s < layout.strata(); ++s) {
        int ns = layout.size(s);
        const auto& block = a.blocks_[s];
        for (int i = 0; i < ns; ++i) {
            double row = 0.0, col = 0.0;
            for (int j = 0; j < ns; ++j) {
                row += block[static_cast<std::size_t>(i) * ns + j];
                col += block[static_cast<std::size_t>(j) * ns + i];
            }
            if (std::abs(row) > tol || std::abs(col) > tol) {
                raise(ErrorCode::domain,
                      "CenteredArray: stratum " + std::to_string(s + 1) +
                          " violates the zero row/column sum condition");
            }
        }
    }
    return a;
}

CenteredArray CenteredArray::product(const StrataLayout& layout, std::vector<double> u,
                                     std::vector<double> w) {
    require_length(u.size(), layout, "CenteredArray row factor");
    require_length(w.size(), layout, "CenteredArray column factor");
    CenteredArray a(layout);
    a.product_ = true;
    a.u_ = std::move(u);
    a.w_ = std::move(w);
    for (int s = 0; s < layout.strata(); ++s) {
        double mu = 0.0, mw = 0.0;
        for (int i = 0; i < layout.size(s); ++i) {
            mu = std::max(mu, std::abs(a.u_[layout.offset(s) + i]));
            mw = std::max(mw, std::abs(a.w_[layout.offset(s) + i]));
        }
        a.max_abs_ = std::max(a.max_abs_, mu * mw);
    }
    return a;
}

double CenteredArray::entry(int s, int i, int j) const {
    if (product_) {
        return u_[layout_.offset(s) + i] * w_[layout_.offset(s) + j];
    }
    return blocks_[s][static_cast<std::size_t>(i) * layout_.size(s) + j];
}

std::span<const double> CenteredArray::row_factor(int s) const {
    if (!product_) raise(ErrorCode::internal, "row_factor: dense representation");
    return {u_.data() + layout_.offset(s), static_cast<std::size_t>(layout_.size(s))};
}

std::span<const double> CenteredArray::col_factor(int s) const {
    if (!product_) raise(ErrorCode::internal, "col_factor: dense representation");
    return {w_.data() + layout_.offset(s), static_cast<std::size_t>(layout_.size(s))};
}

const std::vector<double>& CenteredArray::dense_block(int s) const {
    if (product_) raise(ErrorCode::internal, "dense_block: product representation");
    return blocks_[s];
}

CenteredArray CenteredArray::materialize_dense(int max_stratum_size) const {
    if (!product_) return *this;
    for (int s = 0; s < layout_.strata(); ++s) {
        if (layout_.size(s) > max_stratum_size) {
            raise(ErrorCode::too_large,
                  "materialize_dense: stratum of size " + std::to_string(layout_.size(s)) +
                      " exceeds the dense cap " + std::to_string(max_stratum_size));
        }
    }
    std::vector<std::vector<double>> blocks(layout_.strata());
    for (int s = 0; s < layout_.strata(); ++s) {
        int ns = layout_.size(s);
        blocks[s].resize(static_cast<std::size_t>(ns) * ns);
        for (int i = 0; i < ns; ++i) {
            for (int j = 0; j < ns; ++j) {
                blocks[s][static_cast<std::size_t>(i) * ns + j] = entry(s, i, j);
            }
        }
    }
    // product factors are demeaned, so centering holds up to rounding
    return dense(layout_, std::move(blocks), 1e-10);
}

std::vector<double> demean_within_strata(std::span<const double> v, const StrataLayout& layout) {
    require_length(v.size(), layout, "demean_within_strata");
    std::vector<double> out(v.begin(), v.end());
    for (int s = 0; s < layout.strata(); ++s) {
        int off = layout.offset(s);
        int ns = layout.size(s);
        double mean = 0.0;
        for (int i = 0; i < ns; ++i) mean += out[off + i];
        mean /= ns;
        for (int i = 0; i < ns; ++i) out[off + i] -= mean;
    }
    return out;
}

CenteredArray build_centered_array(std::span<const double> b, std::span<const double> c,
                                   const StrataLayout& layout) {
    return CenteredArray::product(layout, demean_within_strata(b, layout),
                                  demean_within_strata(c, layout));
}

}  // namespace strata
