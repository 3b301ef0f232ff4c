#include "strata/statistics.hpp"

#include <algorithm>
#include <cmath>

namespace strata {

namespace {

double require_positive_sigma(double sigma_sq) {
    if (!(sigma_sq > 0.0)) {
        raise(ErrorCode::degenerate,
              "degenerate variance: the centered array is zero in every stratum");
    }
    return sigma_sq;
}

}  // namespace

double stratified_sigma_sq(const CenteredArray& a) {
    const StrataLayout& layout = a.layout();
    double total = 0.0;
    for (int s = 0; s < layout.strata(); ++s) {
        int ns = layout.size(s);
        if (ns < 2) continue;
        if (a.is_product()) {
            auto u = a.row_factor(s);
            auto w = a.col_factor(s);
            double su = 0.0, sw = 0.0;
            for (int i = 0; i < ns; ++i) {
                su += u[i] * u[i];
                sw += w[i] * w[i];
            }
            total += su * sw / (ns - 1);
        } else {
            double ss = 0.0;
            for (double v : a.dense_block(s)) ss += v * v;
            total += ss / (ns - 1);
        }
    }
    return total;
}

double lindeberg_sum(const CenteredArray& a, double sigma_sq, double eps) {
    require_positive_sigma(sigma_sq);
    const StrataLayout& layout = a.layout();
    const double sigma = std::sqrt(sigma_sq);
    const double cut = eps * sigma;
    double total = 0.0;
    for (int s = 0; s < layout.strata(); ++s) {
        int ns = layout.size(s);
        if (ns < 2) continue;
        double acc = 0.0;
        if (a.is_product()) {
            auto u = a.row_factor(s);
            auto w = a.col_factor(s);
            for (int i = 0; i < ns; ++i) {
                for (int j = 0; j < ns; ++j) {
                    double v = u[i] * w[j];
                    if (std::abs(v) > cut) acc += v * v;
                }
            }
        } else {
            for (double v : a.dense_block(s)) {
                if (std::abs(v) > cut) acc += v * v;
            }
        }
        total += acc / ns;
    }
    return total / sigma_sq;
}

double lyapunov_sum(const CenteredArray& a, double sigma_sq, double delta) {
    require_positive_sigma(sigma_sq);
    if (!(delta > 0.0)) raise(ErrorCode::domain, "lyapunov_sum: delta must be > 0");
    const StrataLayout& layout = a.layout();
    const double p = 2.0 + delta;
    double total = 0.0;
    for (int s = 0; s < layout.strata(); ++s) {
        int ns = layout.size(s);
        if (ns < 2) continue;
        double acc = 0.0;
        if (a.is_product()) {
            // |u_i w_j|^p factorizes across the double sum
            auto u = a.row_factor(s);
            auto w = a.col_factor(s);
            double su = 0.0, sw = 0.0;
            for (int i = 0; i < ns; ++i) {
                su += std::pow(std::abs(u[i]), p);
                sw += std::pow(std::abs(w[i]), p);
            }
            acc = su * sw;
        } else {
            for (double v : a.dense_block(s)) acc += std::pow(std::abs(v), p);
        }
        total += acc / ns;
    }
    return total / std::pow(sigma_sq, 0.5 * p);
}

CltDiagnostics clt_diagnostics(const CenteredArray& a, std::span<const double> eps_grid,
                               double delta) {
    CltDiagnostics d;
    d.sigma_sq = require_positive_sigma(stratified_sigma_sq(a));
    d.singleton_strata = a.layout().singleton_count();
    std::vector<double> grid(eps_grid.begin(), eps_grid.end());
    std::sort(grid.begin(), grid.end());
    for (double eps : grid) d.lindeberg.emplace_back(eps, lindeberg_sum(a, d.sigma_sq, eps));
    d.lyapunov_delta = delta;
    d.lyapunov = lyapunov_sum(a, d.sigma_sq, delta);
    if (a.is_product()) {
        const StrataLayout& layout = a.layout();
        double third = 0.0, fourth = 0.0;
        for (int s = 0; s < layout.strata(); ++s) {
            int ns = layout.size(s);
            if (ns < 2) continue;
            auto u = a.row_factor(s);
            auto w = a.col_factor(s);
            double u3 = 0.0, w3 = 0.0, u4 = 0.0, w4 = 0.0;
            for (int i = 0; i < ns; ++i) {
                double au = std::abs(u[i]), aw = std::abs(w[i]);
                u3 += au * au * au;
                w3 += aw * aw * aw;
                u4 += au * au * au * au;
                w4 += aw * aw * aw * aw;
            }
            third += u3 * w3 / ns;
            fourth += u4 * w4 / (ns - 1);
        }
        d.product_terms = std::array<double, 3>{d.sigma_sq, third, fourth};
    }
    return d;
}

double diagonal_sum(const CenteredArray& a, const StratifiedPermutation& pi) {
    if (!(pi.layout() == a.layout())) {
        raise(ErrorCode::dimension, "diagonal_sum: permutation layout differs from array layout");
    }
    const StrataLayout& layout = a.layout();
    double total = 0.0;
    for (int s = 0; s < layout.strata(); ++s) {
        int ns = layout.size(s);
        if (a.is_product()) {
            auto u = a.row_factor(s);
            auto w = a.col_factor(s);
            for (int i = 0; i < ns; ++i) total += u[i] * w[pi.image(s, i)];
        } else {
            const auto& block = a.dense_block(s);
            for (int i = 0; i < ns; ++i) {
                total += block[static_cast<std::size_t>(i) * ns + pi.image(s, i)];
            }
        }
    }
    return total;
}

double t_statistic(const CenteredArray& a, const StratifiedPermutation& pi) {
    double sigma_sq = require_positive_sigma(stratified_sigma_sq(a));
    return diagonal_sum(a, pi) / std::sqrt(sigma_sq);
}

Matrix demean_columns(const Matrix& m, const StrataLayout& layout) {
    if (m.rows != layout.total()) raise(ErrorCode::dimension, "demean_columns: row count");
    Matrix out = m;
    for (int s = 0; s < layout.strata(); ++s) {
        int off = layout.offset(s);
        int ns = layout.size(s);
        for (int c = 0; c < m.cols; ++c) {
            double mean = 0.0;
            for (int i = 0; i < ns; ++i) mean += out.at(off + i, c);
            mean /= ns;
            for (int i = 0; i < ns; ++i) out.at(off + i, c) -= mean;
        }
    }
    return out;
}

Matrix permutation_covariance(const Matrix& b, std::span<const double> c,
                              const StrataLayout& layout) {
    if (b.cols < 1) raise(ErrorCode::dimension, "permutation_covariance: need k >= 1");
    if (b.rows != layout.total()) raise(ErrorCode::dimension, "permutation_covariance: rows");
    require_length(c.size(), layout, "permutation_covariance");
    const int k = b.cols;
    Matrix bt = demean_columns(b, layout);
    std::vector<double> ct = demean_within_strata(c, layout);

    Matrix sigma(k, k);
    for (int s = 0; s < layout.strata(); ++s) {
        int off = layout.offset(s);
        int ns = layout.size(s);
        if (ns < 2) continue;
        double sc = 0.0;
        for (int i = 0; i < ns; ++i) sc += ct[off + i] * ct[off + i];
        double weight = sc / (ns - 1);
        for (int r = 0; r < k; ++r) {
            for (int col = r; col < k; ++col) {
                double acc = 0.0;
                for (int i = 0; i < ns; ++i) acc += bt.at(off + i, r) * bt.at(off + i, col);
                sigma.at(r, col) += acc * weight;
            }
        }
    }
    for (int r = 0; r < k; ++r) {
        for (int col = 0; col < r; ++col) sigma.at(r, col) = sigma.at(col, r);
    }
    double n = layout.total();
    for (double& v : sigma.data) v /= n;
    return sigma;
}

CenteredArray directional_array(const Matrix& b, std::span<const double> c,
                                const StrataLayout& layout, std::span<const double> t,
                                double min_eig_floor) {
    Matrix sigma = permutation_covariance(b, c, layout);
    if (static_cast<int>(t.size()) != sigma.rows) {
        raise(ErrorCode::dimension, "directional_array: direction length");
    }
    Matrix root = symmetric_inverse_sqrt(sigma, min_eig_floor);
    std::vector<double> proj(t.size());
    for (int i = 0; i < root.rows; ++i) {
        double acc = 0.0;
        for (int j = 0; j < root.cols; ++j) acc += t[j] * root.at(j, i);
        proj[i] = acc;
    }
    Matrix bt = demean_columns(b, layout);
    double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(layout.total()));
    std::vector<double> u(layout.total());
    for (int r = 0; r < layout.total(); ++r) {
        double acc = 0.0;
        for (int j = 0; j < bt.cols; ++j) acc += proj[j] * bt.at(r, j);
        u[r] = acc * inv_sqrt_n;
    }
    return CenteredArray::product(layout, std::move(u), demean_within_strata(c, layout));
}

IRMoments ir_moments(std::span<const double> q, std::span<const double> rho,
                     const StrataLayout& layout) {
    require_length(q.size(), layout, "ir_moments q");
    require_length(rho.size(), layout, "ir_moments rho");
    IRMoments m;
    m.n_effective = layout.total() - layout.singleton_count();
    for (int s = 0; s < layout.strata(); ++s) {
        int off = layout.offset(s);
        int ns = layout.size(s);
        double qb = 0.0, rb = 0.0;
        for (int i = 0; i < ns; ++i) {
            qb += q[off + i];
            rb += rho[off + i];
        }
        qb /= ns;
        rb /= ns;
        m.mu += ns * qb * rb;
        if (ns < 2) continue;  // singleton strata have zero permutation variance
        double sq = 0.0, sr = 0.0;
        for (int i = 0; i < ns; ++i) {
            sq += (q[off + i] - qb) * (q[off + i] - qb);
            sr += (rho[off + i] - rb) * (rho[off + i] - rb);
        }
        m.sigma_sq += sq * sr / (ns - 1);
    }
    return m;
}

double ir_t(std::span<const double> q, std::span<const double> rho, const StrataLayout& layout,
            const StratifiedPermutation& pi) {
    require_length(q.size(), layout, "ir_t q");
    require_length(rho.size(), layout, "ir_t rho");
    double total = 0.0;
    for (int s = 0; s < layout.strata(); ++s) {
        int off = layout.offset(s);
        for (int i = 0; i < layout.size(s); ++i) {
            total += q[off + i] * rho[off + pi.image(s, i)];
        }
    }
    return total;
}

IRStatistic ir_statistic(std::span<const double> q, std::span<const double> rho,
                         const StrataLayout& layout, const StratifiedPermutation& pi) {
    IRStatistic out;
    out.moments = ir_moments(q, rho, layout);
    if (!(out.moments.sigma_sq > 0.0)) {
        raise(ErrorCode::degenerate,
              "degenerate permutation variance: no stratum of size >= 2 with variation in "
              "both score vectors");
    }
    out.t = ir_t(q, rho, layout, pi);
    out.standardized = (out.t - out.moments.mu) / std::sqrt(out.moments.sigma_sq);
    return out;
}

RankARComponents rank_ar_from_scores(const Matrix& ztilde, std::span<const double> scores,
                                     double integral_var, std::span<const double> table_var,
                                     const StrataLayout& layout, double min_eig_floor) {
    const int k = ztilde.cols;
    if (k < 1) raise(ErrorCode::dimension, "rank AR statistic needs k >= 1 instruments");
    if (ztilde.rows != layout.total()) raise(ErrorCode::dimension, "rank_ar: z rows");
    require_length(scores.size(), layout, "rank_ar scores");
    if (table_var.size() != static_cast<std::size_t>(layout.strata())) {
        raise(ErrorCode::dimension, "rank_ar: one table variance per stratum");
    }

    RankARComponents out;
    out.k = k;
    out.a.assign(k, 0.0);
    out.omega = Matrix(k, k);
    out.omega_star = Matrix(k, k);
    const double n = layout.total();

    for (int s = 0; s < layout.strata(); ++s) {
        int off = layout.offset(s);
        int ns = layout.size(s);
        for (int i = 0; i < ns; ++i) {
            for (int c = 0; c < k; ++c) out.a[c] += ztilde.at(off + i, c) * scores[off + i];
        }
        for (int r = 0; r < k; ++r) {
            for (int c = r; c < k; ++c) {
                double acc = 0.0;
                for (int i = 0; i < ns; ++i) acc += ztilde.at(off + i, r) * ztilde.at(off + i, c);
                out.omega.at(r, c) += acc;
                if (ns >= 2) out.omega_star.at(r, c) += acc * table_var[s];
            }
        }
    }
    for (double& v : out.a) v /= n;
    for (int r = 0; r < k; ++r) {
        for (int c = 0; c < r; ++c) {
            out.omega.at(r, c) = out.omega.at(c, r);
            out.omega_star.at(r, c) = out.omega_star.at(c, r);
        }
    }
    for (double& v : out.omega.data) v *= integral_var / n;
    for (double& v : out.omega_star.data) v /= n;

    out.lambda_min = min_eigenvalue(out.omega);
    out.lambda_min_star = min_eigenvalue(out.omega_star);
    out.b = n * spd_quadratic_form(out.omega, out.a, min_eig_floor);
    out.b_star = n * spd_quadratic_form(out.omega_star, out.a, min_eig_floor);
    return out;
}

RankARComponents rank_ar_components(const Matrix& z, const RankVector& ranks,
                                    const ScoreSpec& spec, const StrataLayout& layout,
                                    double min_eig_floor) {
    if (spec.kind == ScoreKind::identity) {
        raise(ErrorCode::domain, "rank AR statistic requires a rank score (wilcoxon or normal)");
    }
    Matrix zt = demean_columns(z, layout);
    std::vector<double> scores = score_transform(ranks, layout, spec);
    std::vector<double> table_var(layout.strata(), 0.0);
    for (int s = 0; s < layout.strata(); ++s) {
        if (layout.size(s) >= 2) table_var[s] = score_table_variance(layout.size(s), spec);
    }
    return rank_ar_from_scores(zt, scores, spec.integral_variance(), table_var, layout,
                               min_eig_floor);
}

FinitePopBridge finite_pop_bridge(const std::vector<std::vector<double>>& y,
                                  const std::vector<int>& n1) {
    if (y.empty() || y.size() != n1.size()) {
        raise(ErrorCode::dimension, "finite_pop_bridge: need matching y and n1 lists");
    }
    std::vector<int> sizes;
    sizes.reserve(y.size());
    for (std::size_t s = 0; s < y.size(); ++s) {
        int ns = static_cast<int>(y[s].size());
        if (n1[s] < 2 || n1[s] > ns - 1) {
            raise(ErrorCode::domain, "finite_pop_bridge: stratum " + std::to_string(s + 1) +
                                         " needs 2 <= n1 <= ns-1 (ns=" + std::to_string(ns) +
                                         ", n1=" + std::to_string(n1[s]) + ")");
        }
        sizes.push_back(ns);
    }
    FinitePopBridge bridge{StrataLayout(sizes), {}, n1, 0.0, 0.0, {}, {}, 0.0, false};
    const StrataLayout& layout = bridge.layout;
    const double n = layout.total();

    bridge.y.reserve(layout.total());
    bridge.b.reserve(layout.total());
    bridge.c.reserve(layout.total());
    for (int s = 0; s < layout.strata(); ++s) {
        int ns = layout.size(s);
        double ps = ns / n;
        double ybar_s = 0.0;
        for (double v : y[s]) ybar_s += v;
        ybar_s /= ns;
        bridge.ybar += ps * ybar_s;
        double vs = 0.0;
        for (double v : y[s]) vs += (v - ybar_s) * (v - ybar_s);
        vs /= (ns - 1);
        bridge.v_sq += ps * ps * vs * (ns - n1[s]) / (static_cast<double>(n1[s]) * ns);
        for (int i = 0; i < ns; ++i) {
            bridge.y.push_back(y[s][i]);
            bridge.b.push_back(i < n1[s] ? 1.0 / n1[s] : 0.0);
            bridge.c.push_back(ps * y[s][i]);
        }
    }
    bridge.sigma_sq = stratified_sigma_sq(fp_embedded_array(bridge));
    bridge.degenerate = !(bridge.v_sq > 0.0);
    if (!bridge.degenerate &&
        std::abs(bridge.sigma_sq - bridge.v_sq) > 1e-12 * std::abs(bridge.v_sq)) {
        raise(ErrorCode::internal, "finite_pop_bridge: sampling variance identity violated");
    }
    return bridge;
}

CenteredArray fp_embedded_array(const FinitePopBridge& bridge) {
    return build_centered_array(bridge.b, bridge.c, bridge.layout);
}

std::pair<double, double> fp_sample_stats(const std::vector<std::vector<double>>& y,
                                          const std::vector<int>& n1,
                                          std::span<const std::uint8_t> indicators) {
    if (y.size() != n1.size()) raise(ErrorCode::dimension, "fp_sample_stats: list sizes");
    std::size_t total = 0;
    for (const auto& ys : y) total += ys.size();
    if (indicators.size() != total) {
        raise(ErrorCode::dimension, "fp_sample_stats: indicator length");
    }
    double n = static_cast<double>(total);
    double yhat = 0.0, vhat_sq = 0.0;
    std::size_t off = 0;
    for (std::size_t s = 0; s < y.size(); ++s) {
        int ns = static_cast<int>(y[s].size());
        if (n1[s] < 2 || n1[s] > ns - 1) {
            raise(ErrorCode::domain, "fp_sample_stats: 2 <= n1 <= ns-1 violated in stratum " +
                                         std::to_string(s + 1));
        }
        int count = 0;
        double mean = 0.0;
        for (int i = 0; i < ns; ++i) {
            if (indicators[off + i]) {
                count += 1;
                mean += y[s][i];
            }
        }
        if (count != n1[s]) {
            raise(ErrorCode::domain, "fp_sample_stats: stratum " + std::to_string(s + 1) +
                                         " has " + std::to_string(count) +
                                         " sampled units, expected " + std::to_string(n1[s]));
        }
        mean /= n1[s];
        // sample variance with the population-style (ns-1) normalization
        double ss = 0.0;
        for (int i = 0; i < ns; ++i) {
            if (indicators[off + i]) ss += (y[s][i] - mean) * (y[s][i] - mean);
        }
        double vhat_s = ss / (ns - 1);
        double ps = ns / n;
        yhat += ps * mean;
        vhat_sq += ps * ps * vhat_s * (ns - n1[s]) / (static_cast<double>(n1[s]) * ns);
        off += ns;
    }
    return {yhat, vhat_sq};
}

double fp_lindeberg_sum(const FinitePopBridge& bridge, double eps) {
    const StrataLayout& layout = bridge.layout;
    double sigma_sq = require_positive_sigma(bridge.v_sq);
    double sigma = std::sqrt(sigma_sq);
    double n = layout.total();
    double total = 0.0;
    for (int s = 0; s < layout.strata(); ++s) {
        int off = layout.offset(s);
        int ns = layout.size(s);
        double ps = ns / n;
        double ybar_s = 0.0;
        for (int i = 0; i < ns; ++i) ybar_s += bridge.y[off + i];
        ybar_s /= ns;
        double weight = ps * ps * (ns - bridge.sampled[s]) /
                        (static_cast<double>(bridge.sampled[s]) * ns * sigma_sq);
        double acc = 0.0;
        for (int i = 0; i < ns; ++i) {
            double dev = bridge.y[off + i] - ybar_s;
            if (ps * std::abs(dev) / sigma > eps * bridge.sampled[s]) {
                acc += weight * dev * dev;
            }
        }
        total += acc / (ns - 1);
    }
    return total;
}

}  // namespace strata
