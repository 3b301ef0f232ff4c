#include "strata/coupling.hpp"

#include <algorithm>
#include <array>
#include <numeric>

namespace strata {

namespace {

void require_no_singletons(const StrataLayout& layout) {
    if (layout.singleton_count() > 0) {
        raise(ErrorCode::coupling_undefined,
              "stein coupling undefined: layout " + layout.describe() +
                  " has strata of size 1 (J2 needs at least two candidates)");
    }
}

// tau maps i1 -> i4 and i2 -> i3, fixes everything outside the quadruple,
// and sends the leftover of {i3,i4} onto the leftover of {i1,i2}. With all
// four distinct that leftover assignment is i3 -> i2, i4 -> i1, i.e. the
// involution (i1 i4)(i2 i3); in the overlapping cases it is forced.
std::vector<int> make_tau(int ns, int i1, int i2, int i3, int i4) {
    std::vector<int> tau(ns);
    std::iota(tau.begin(), tau.end(), 0);
    tau[i1] = i4;
    tau[i2] = i3;
    bool i3_left = (i3 != i1 && i3 != i2);
    bool i4_left = (i4 != i1 && i4 != i2);
    bool i1_miss = (i1 != i3 && i1 != i4);
    bool i2_miss = (i2 != i3 && i2 != i4);
    if (i3_left && i4_left) {
        tau[i3] = i2;
        tau[i4] = i1;
    } else if (i3_left) {
        tau[i3] = i1_miss ? i1 : i2;
    } else if (i4_left) {
        tau[i4] = i1_miss ? i1 : i2;
    }
    return tau;
}

}  // namespace

CouplingDraw make_coupling_draw(const StratifiedPermutation& pi, int stratum, int i1, int i2,
                                int j1, int j2) {
    const StrataLayout& layout = pi.layout();
    int ns = layout.size(stratum);
    int off = layout.offset(stratum);

    int i3 = pi.preimage(stratum, j1);
    int i4 = pi.preimage(stratum, j2);
    std::vector<int> tau = make_tau(ns, i1, i2, i3, i4);

    std::vector<int> dagger(pi.forward_all().begin(), pi.forward_all().end());
    for (int a = 0; a < ns; ++a) dagger[off + a] = pi.image(stratum, tau[a]);

    std::vector<int> star = dagger;
    std::swap(star[off + i1], star[off + i2]);

    CouplingDraw draw{stratum,
                      i1,
                      i2,
                      i3,
                      i4,
                      j1,
                      j2,
                      pi.image(stratum, i1),
                      pi.image(stratum, i2),
                      pi,
                      StratifiedPermutation(layout, std::move(dagger)),
                      StratifiedPermutation(layout, std::move(star))};
    return draw;
}

CouplingDraw stein_coupling(const StratifiedPermutation& pi, const StrataLayout& layout,
                            Rng& rng) {
    require_no_singletons(layout);
    // P(S = s) = ns / n: pick a uniform unit and take its stratum.
    int s = layout.stratum_of(static_cast<int>(rng.below(layout.total())));
    int ns = layout.size(s);
    int i1 = static_cast<int>(rng.below(ns));
    int i2 = static_cast<int>(rng.below(ns));
    int j1 = static_cast<int>(rng.below(ns));
    int j2;
    if (i1 == i2) {
        j2 = j1;
    } else {
        int v = static_cast<int>(rng.below(ns - 1));
        j2 = (v >= j1) ? v + 1 : v;
    }
    return make_coupling_draw(pi, s, i1, i2, j1, j2);
}

namespace {

// Rank of a stratified permutation via per-stratum Lehmer codes combined in
// mixed radix, last stratum fastest (matching the enumerator order).
struct PermRanker {
    explicit PermRanker(const StrataLayout& layout) : layout_(&layout) {
        factorial_.assign(layout.strata(), 1);
        stride_.assign(layout.strata(), 1);
        for (int s = 0; s < layout.strata(); ++s) {
            std::uint64_t f = 1;
            for (int m = 2; m <= layout.size(s); ++m) f *= m;
            factorial_[s] = f;
        }
        for (int s = layout.strata() - 2; s >= 0; --s) {
            stride_[s] = stride_[s + 1] * factorial_[s + 1];
        }
    }

    std::uint64_t rank(const StratifiedPermutation& p) const {
        std::uint64_t r = 0;
        for (int s = 0; s < layout_->strata(); ++s) {
            int ns = layout_->size(s);
            std::uint64_t lehmer = 0;
            for (int i = 0; i < ns; ++i) {
                int smaller = 0;
                for (int j = i + 1; j < ns; ++j) smaller += (p.image(s, j) < p.image(s, i));
                lehmer = lehmer * (ns - i) + smaller;
            }
            r += lehmer * stride_[s];
        }
        return r;
    }

    const StrataLayout* layout_;
    std::vector<std::uint64_t> factorial_;
    std::vector<std::uint64_t> stride_;
};

}  // namespace

CouplingCheckReport check_coupling_properties(const StrataLayout& layout,
                                              std::uint64_t perm_cap, int max_stratum) {
    require_no_singletons(layout);
    for (int s = 0; s < layout.strata(); ++s) {
        if (layout.size(s) > max_stratum) {
            raise(ErrorCode::too_large,
                  "coupling check: stratum size " + std::to_string(layout.size(s)) +
                      " exceeds exact-enumeration cap " + std::to_string(max_stratum));
        }
    }
    std::uint64_t nperm = permutation_count(layout, perm_cap);
    PermRanker ranker(layout);

    CouplingCheckReport report;
    report.layout = layout.describe();

    std::vector<StratifiedPermutation> all;
    all.reserve(nperm);
    for_each_permutation(layout, [&](const StratifiedPermutation& p) { all.push_back(p); },
                         perm_cap);

    for (int s = 0; s < layout.strata(); ++s) {
        const int ns = layout.size(s);
        const int quad_space = ns * ns * ns * ns;
        // Conditional on the selected stratum being s. Common denominator:
        // nperm * ns^3 * (ns-1); the i1 == i2 branch carries weight (ns-1).
        const std::uint64_t slice_total =
            nperm * static_cast<std::uint64_t>(ns) * ns * ns * (ns - 1);

        std::vector<std::uint64_t> quad_marg(quad_space, 0);
        std::vector<std::uint64_t> pair_marg(static_cast<std::size_t>(ns) * ns, 0);
        // marginals over permutations for pi / dagger / star
        std::array<std::vector<std::uint64_t>, 3> perm_marg;
        for (auto& v : perm_marg) v.assign(nperm, 0);
        std::array<std::vector<std::uint64_t>, 3> joint_quad;
        for (auto& v : joint_quad) v.assign(nperm * static_cast<std::size_t>(quad_space), 0);
        // property (iii): dagger vs (i1, j1)
        std::vector<std::uint64_t> ij_marg(static_cast<std::size_t>(ns) * ns, 0);
        std::vector<std::uint64_t> joint_ij(nperm * static_cast<std::size_t>(ns) * ns, 0);
        // property (iv): (I_l, p(I_l)) cells, 3 variants x 4 indices
        std::array<std::vector<std::uint64_t>, 12> pair_cells;
        for (auto& v : pair_cells) v.assign(static_cast<std::size_t>(ns) * ns, 0);

        for (const StratifiedPermutation& pi : all) {
            for (int i1 = 0; i1 < ns; ++i1) {
                for (int i2 = 0; i2 < ns; ++i2) {
                    for (int j1 = 0; j1 < ns; ++j1) {
                        for (int j2 = 0; j2 < ns; ++j2) {
                            std::uint64_t w;
                            if (i1 == i2) {
                                if (j2 != j1) continue;
                                w = static_cast<std::uint64_t>(ns - 1);
                            } else {
                                if (j2 == j1) continue;
                                w = 1;
                            }
                            report.atoms += 1;
                            CouplingDraw d = make_coupling_draw(pi, s, i1, i2, j1, j2);

                            // property (i) and the index-matching invariants
                            if (!(d.pi_dagger.image(s, i1) == j2 &&
                                  d.pi_dagger.image(s, i2) == j1 &&
                                  d.pi_star.image(s, i1) == j1 &&
                                  d.pi_star.image(s, i2) == j2)) {
                                report.swap_identities += 1;
                            }
                            if (((i1 == i2) != (d.i3 == d.i4)) || ((i1 == i2) != (j1 == j2))) {
                                report.index_invariants += 1;
                            }
                            // perturbations must fix every other stratum
                            for (int t = 0; t < layout.strata(); ++t) {
                                if (t == s) continue;
                                if (!std::ranges::equal(d.pi_dagger.forward(t), pi.forward(t)) ||
                                    !std::ranges::equal(d.pi_star.forward(t), pi.forward(t))) {
                                    report.cross_stratum += 1;
                                    break;
                                }
                            }

                            int quad = ((i1 * ns + i2) * ns + d.i3) * ns + d.i4;
                            quad_marg[quad] += w;
                            ij_marg[static_cast<std::size_t>(i1) * ns + j1] += w;

                            const StratifiedPermutation* variants[3] = {&d.pi, &d.pi_dagger,
                                                                        &d.pi_star};
                            std::uint64_t ranks[3];
                            for (int v = 0; v < 3; ++v) {
                                ranks[v] = ranker.rank(*variants[v]);
                                perm_marg[v][ranks[v]] += w;
                                joint_quad[v][ranks[v] * quad_space + quad] += w;
                            }
                            joint_ij[ranks[1] * static_cast<std::size_t>(ns) * ns +
                                     static_cast<std::size_t>(i1) * ns + j1] += w;

                            const int idx[4] = {i1, i2, d.i3, d.i4};
                            for (int v = 0; v < 3; ++v) {
                                for (int l = 0; l < 4; ++l) {
                                    int img = variants[v]->image(s, idx[l]);
                                    pair_cells[v * 4 + l]
                                              [static_cast<std::size_t>(idx[l]) * ns + img] += w;
                                }
                            }
                        }
                    }
                }
            }
        }

        // (ii) uniform marginals: every permutation weight equals total/nperm
        for (int v = 0; v < 3; ++v) {
            for (std::uint64_t r = 0; r < nperm; ++r) {
                if (perm_marg[v][r] * nperm != slice_total) report.uniformity += 1;
            }
        }
        // (ii) independence from the quadruple: joint * total == margs product
        for (int v = 0; v < 3; ++v) {
            for (std::uint64_t r = 0; r < nperm; ++r) {
                for (int q = 0; q < quad_space; ++q) {
                    std::uint64_t lhs = joint_quad[v][r * quad_space + q] * slice_total;
                    std::uint64_t rhs = perm_marg[v][r] * quad_marg[q];
                    if (lhs != rhs) report.index_independence += 1;
                }
            }
        }
        // (iii) dagger independent of (I1, J1)
        for (std::uint64_t r = 0; r < nperm; ++r) {
            for (int c = 0; c < ns * ns; ++c) {
                std::uint64_t lhs = joint_ij[r * ns * ns + c] * slice_total;
                std::uint64_t rhs = perm_marg[1][r] * ij_marg[c];
                if (lhs != rhs) report.dagger_independence += 1;
            }
        }
        // (iv) each (I_l, p(I_l)) uniform over the ns x ns square
        for (auto& cells : pair_cells) {
            for (std::uint64_t w : cells) {
                if (w * static_cast<std::uint64_t>(ns) * ns != slice_total) {
                    report.pair_uniformity += 1;
                }
            }
        }
    }
    return report;
}

std::string CouplingCheckReport::summary() const {
    auto line = [](const char* name, std::uint64_t bad) {
        return std::string("  ") + name + ": " + (bad == 0 ? "pass" : "FAIL (" +
                                                  std::to_string(bad) + " violations)") + "\n";
    };
    std::string out = "coupling checks for layout " + layout + " (" + std::to_string(atoms) +
                      " weighted states)\n";
    out += line("swap identities (i)", swap_identities);
    out += line("index invariants", index_invariants);
    out += line("marginal uniformity (ii)", uniformity);
    out += line("independence of index quadruple (ii)", index_independence);
    out += line("perturbed-permutation independence of (I1,J1) (iii)", dagger_independence);
    out += line("index-image pair uniformity (iv)", pair_uniformity);
    out += line("other strata untouched", cross_stratum);
    return out;
}

}  // namespace strata
