#include "strata/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <sstream>

#include "strata/parallel.hpp"
#include "strata/scores.hpp"
#include "strata/special_functions.hpp"
#include "strata/statistics.hpp"

namespace strata {

SimDesign generate_design(int n, int k, int r, Rng& rng) {
    if (n < 1 || k < 1) raise(ErrorCode::domain, "generate_design: need n >= 1, k >= 1");
    if (r < 1 || n / r < 1) {
        raise(ErrorCode::domain, "generate_design: grid n/r must be at least 1");
    }
    SimDesign design;
    design.n = n;
    design.k = k;
    design.r = r;
    design.grid = n / r;

    // Heavy-tailed instruments with covariance equal to the identity: a
    // 5-df multivariate t has covariance (5/3) x scale, so the normal
    // component is shrunk by sqrt(3/5).
    const double scale = std::sqrt(3.0 / 5.0);
    Matrix z_draw(n, k);
    std::vector<int> numerator(n);
    for (int i = 0; i < n; ++i) {
        for (int c = 0; c < k; ++c) z_draw.at(i, c) = rng.normal();
        double denom = std::sqrt(rng.chi_squared(5) / 5.0);
        for (int c = 0; c < k; ++c) z_draw.at(i, c) *= scale / denom;
        numerator[i] = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(design.grid)));
    }

    // Strata = level sets of the grid variable, ascending; stable within.
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return numerator[a] < numerator[b]; });

    std::vector<int> sizes;
    for (int pos = 0; pos < n;) {
        int end = pos + 1;
        while (end < n && numerator[order[end]] == numerator[order[pos]]) ++end;
        sizes.push_back(end - pos);
        pos = end;
    }
    design.layout = StrataLayout(sizes);
    design.max_stratum = *std::max_element(sizes.begin(), sizes.end());

    design.z = Matrix(n, k);
    design.x_numerator.resize(n);
    for (int u = 0; u < n; ++u) {
        int src = order[u];
        design.x_numerator[u] = numerator[src];
        for (int c = 0; c < k; ++c) design.z.at(u, c) = z_draw.at(src, c);
    }
    return design;
}

SimReplication simulate_replication(const SimDesign& design, double rho, double lambda,
                                    Rng& rng) {
    const int n = design.n;
    const int k = design.k;
    const double pi_coef = std::sqrt(lambda / (static_cast<double>(n) * k));
    const double mix = std::sqrt(1.0 - rho * rho);
    SimReplication rep;
    rep.y.resize(n);
    rep.d.resize(n);
    for (int i = 0; i < n; ++i) {
        double u = rng.cauchy();
        double e = rng.cauchy();
        double v = rho * u + mix * e;
        double zsum = 0.0;
        for (int c = 0; c < k; ++c) zsum += design.z.at(i, c);
        rep.d[i] = zsum * pi_coef + v;
        rep.y[i] = u;  // structural coefficient and intercepts are all zero
    }
    return rep;
}

StratifiedDataset make_dataset(const SimDesign& design, const SimReplication& rep) {
    std::vector<std::string> labels(design.n);
    for (int u = 0; u < design.n; ++u) {
        labels[u] = std::to_string(design.x_numerator[u]) + "/" + std::to_string(design.grid);
    }
    std::vector<double> z(design.z.data);
    return StratifiedDataset(std::move(labels), rep.y, rep.d, std::move(z), design.k);
}

namespace {

// Explicit SPD inverse via the Cholesky solver, hoisted out of the
// replication loop.
Matrix spd_inverse(const Matrix& m, double floor) {
    const int k = m.rows;
    Matrix inv(k, k);
    std::vector<double> e(k, 0.0);
    for (int c = 0; c < k; ++c) {
        e[c] = 1.0;
        std::vector<double> col = spd_solve(m, e, floor);
        for (int r = 0; r < k; ++r) inv.at(r, c) = col[r];
        e[c] = 0.0;
    }
    return inv;
}

double quadratic(const Matrix& m, std::span<const double> v) {
    double acc = 0.0;
    for (int r = 0; r < m.rows; ++r) {
        double row = 0.0;
        for (int c = 0; c < m.cols; ++c) row += m.at(r, c) * v[c];
        acc += v[r] * row;
    }
    return acc;
}

}  // namespace

std::vector<SimCell> rejection_table(const SimConfig& config) {
    if (config.replications < 1) raise(ErrorCode::domain, "rejection_table: replications >= 1");
    Rng master(config.seed);
    std::vector<SimCell> cells;

    const ScoreSpec normal_score{ScoreKind::normal};
    const ScoreSpec wilcoxon_score{ScoreKind::wilcoxon};
    const double crit = chi2_quantile(1.0 - config.alpha, config.k);

    for (std::size_t ci = 0; ci < config.r_values.size(); ++ci) {
        const int r = config.r_values[ci];
        const std::uint64_t cell_salt =
            static_cast<std::uint64_t>(config.k) * 1000003ull + static_cast<std::uint64_t>(r);
        Rng cell_rng = master.child(cell_salt);
        Rng design_rng = cell_rng.child(0);
        SimDesign design = generate_design(config.n, config.k, r, design_rng);
        const StrataLayout& layout = design.layout;
        const int n = design.n;
        const int k = design.k;

        SimCell cell;
        cell.k = config.k;
        cell.r = r;
        cell.strata = layout.strata();
        cell.max_stratum = design.max_stratum;
        cell.replications = config.replications;
        cell.seed = config.seed;

        Matrix zt = demean_columns(design.z, layout);
        // Score tables and their finite-sample variances per stratum; the
        // covariance matrices depend only on the fixed design.
        std::vector<double> table_var_n(layout.strata(), 0.0);
        std::vector<double> table_var_w(layout.strata(), 0.0);
        std::vector<std::vector<double>> table_n(layout.strata()), table_w(layout.strata());
        for (int s = 0; s < layout.strata(); ++s) {
            int ns = layout.size(s);
            table_n[s] = score_table(ns, normal_score);
            table_w[s] = score_table(ns, wilcoxon_score);
            if (ns >= 2) {
                table_var_n[s] = score_table_variance(ns, normal_score);
                table_var_w[s] = score_table_variance(ns, wilcoxon_score);
            }
        }
        Matrix omega_base(k, k);  // sum_s sum_i ztilde ztilde'
        Matrix omega_star_n(k, k), omega_star_w(k, k);
        for (int s = 0; s < layout.strata(); ++s) {
            int off = layout.offset(s);
            int ns = layout.size(s);
            for (int rr = 0; rr < k; ++rr) {
                for (int cc = rr; cc < k; ++cc) {
                    double acc = 0.0;
                    for (int i = 0; i < ns; ++i) {
                        acc += zt.at(off + i, rr) * zt.at(off + i, cc);
                    }
                    omega_base.at(rr, cc) += acc;
                    if (ns >= 2) {
                        omega_star_n.at(rr, cc) += acc * table_var_n[s];
                        omega_star_w.at(rr, cc) += acc * table_var_w[s];
                    }
                }
            }
        }
        for (int rr = 0; rr < k; ++rr) {
            for (int cc = 0; cc < rr; ++cc) {
                omega_base.at(rr, cc) = omega_base.at(cc, rr);
                omega_star_n.at(rr, cc) = omega_star_n.at(cc, rr);
                omega_star_w.at(rr, cc) = omega_star_w.at(cc, rr);
            }
        }
        Matrix omega_n = omega_base, omega_w = omega_base;
        for (double& v : omega_n.data) v *= normal_score.integral_variance() / n;
        for (double& v : omega_w.data) v *= wilcoxon_score.integral_variance() / n;
        for (double& v : omega_star_n.data) v /= n;
        for (double& v : omega_star_w.data) v /= n;

        Matrix inv[4];
        try {
            inv[0] = spd_inverse(omega_star_n, kEigFloor);
            inv[1] = spd_inverse(omega_star_w, kEigFloor);
            inv[2] = spd_inverse(omega_n, kEigFloor);
            inv[3] = spd_inverse(omega_w, kEigFloor);
        } catch (const Error&) {
            // degenerate instrument design: every replication fails
            cell.errors = config.replications;
            cells.push_back(cell);
            continue;
        }

        std::vector<std::array<std::uint8_t, 4>> reject(config.replications);
        std::vector<std::uint8_t> failed(config.replications, 0);
        parallel_for(0, config.replications, config.threads, [&](int rep_idx) {
            try {
                Rng rep_rng = cell_rng.child(1 + static_cast<std::uint64_t>(rep_idx));
                SimReplication rep =
                    simulate_replication(design, config.rho, config.lambda, rep_rng);
                std::vector<double> residual(n);
                for (int i = 0; i < n; ++i) {
                    residual[i] = rep.y[i] - config.beta0 * rep.d[i];
                }
                RankVector ranks =
                    ranks_within_strata(residual, layout, TiePolicy::random, &rep_rng);

                std::array<std::vector<double>, 2> a{std::vector<double>(k, 0.0),
                                                     std::vector<double>(k, 0.0)};
                for (int s = 0; s < layout.strata(); ++s) {
                    int off = layout.offset(s);
                    int ns = layout.size(s);
                    for (int i = 0; i < ns; ++i) {
                        int rank = ranks.rank[off + i];
                        double sn = table_n[s][rank - 1];
                        double sw = table_w[s][rank - 1];
                        for (int c = 0; c < k; ++c) {
                            a[0][c] += zt.at(off + i, c) * sn;
                            a[1][c] += zt.at(off + i, c) * sw;
                        }
                    }
                }
                for (int c = 0; c < k; ++c) {
                    a[0][c] /= n;
                    a[1][c] /= n;
                }
                double stats[4] = {
                    n * quadratic(inv[0], a[0]),  // exact covariance, normal score
                    n * quadratic(inv[1], a[1]),  // exact covariance, wilcoxon
                    n * quadratic(inv[2], a[0]),  // integral covariance, normal
                    n * quadratic(inv[3], a[1]),  // integral covariance, wilcoxon
                };
                for (int t = 0; t < 4; ++t) reject[rep_idx][t] = stats[t] > crit;
            } catch (const Error&) {
                failed[rep_idx] = 1;
            }
        });

        int good = 0;
        std::array<int, 4> counts{};
        for (int i = 0; i < config.replications; ++i) {
            if (failed[i]) {
                cell.errors += 1;
                continue;
            }
            good += 1;
            for (int t = 0; t < 4; ++t) counts[t] += reject[i][t];
        }
        for (int t = 0; t < 4; ++t) {
            cell.rejection_pct[t] = good > 0 ? 100.0 * counts[t] / good : 0.0;
        }
        cells.push_back(cell);
    }
    return cells;
}

std::string rejection_table_csv(const std::vector<SimCell>& cells) {
    std::ostringstream out;
    out.precision(10);
    out << "k,r,stat,rejection_pct,max_ns,S,reps,seed\n";
    for (const SimCell& cell : cells) {
        for (std::size_t t = 0; t < kSimStatNames.size(); ++t) {
            out << cell.k << ',' << cell.r << ',' << kSimStatNames[t] << ','
                << cell.rejection_pct[t] << ',' << cell.max_stratum << ',' << cell.strata << ','
                << cell.replications << ',' << cell.seed << '\n';
        }
    }
    return out.str();
}

}  // namespace strata
