#include "strata/verify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "strata/coupling.hpp"
#include "strata/special_functions.hpp"
#include "strata/statistics.hpp"

namespace strata {

namespace {

void add_check(VerifyResult& res, const std::string& name, bool ok, const std::string& detail) {
    res.passed = res.passed && ok;
    res.summary += std::string(ok ? "  pass  " : "  FAIL  ") + name +
                   (detail.empty() ? "" : " (" + detail + ")") + "\n";
    res.details["checks"].push_back({{"name", name}, {"pass", ok}, {"detail", detail}});
}

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(6);
    out << v;
    return out.str();
}

}  // namespace

VerifyResult verify_coupling(int max_stratum) {
    VerifyResult res{"coupling", true, "", nlohmann::ordered_json::object()};
    std::vector<std::vector<int>> layouts = {{2}, {3}, {2, 3}};
    if (max_stratum >= 4) {
        layouts.push_back({4});
        layouts.push_back({2, 4});
    }
    for (const auto& sizes : layouts) {
        StrataLayout layout(sizes);
        CouplingCheckReport report = check_coupling_properties(layout, 10'000, max_stratum);
        add_check(res, "exact properties on " + layout.describe(), report.all_pass(),
                  std::to_string(report.atoms) + " weighted states");
        res.details["layouts"].push_back(
            {{"layout", layout.describe()},
             {"atoms", report.atoms},
             {"pass", report.all_pass()}});
    }
    return res;
}

VerifyResult verify_uniformity(std::uint64_t seed) {
    VerifyResult res{"uniformity", true, "", nlohmann::ordered_json::object()};
    Rng master(seed);

    {
        // pair stratum: the swap should occur half the time
        StrataLayout layout({2});
        Rng rng = master.child(1);
        const int draws = 100'000;
        int swaps = 0;
        for (int i = 0; i < draws; ++i) {
            swaps += sample_permutation(layout, rng).image(0, 0) == 1;
        }
        double freq = static_cast<double>(swaps) / draws;
        add_check(res, "swap frequency on [2]", freq >= 0.495 && freq <= 0.505, fmt(freq));
        res.details["swap_frequency"] = freq;
    }
    {
        // all 12 permutations of [3,2]: chi-squared goodness of fit
        StrataLayout layout({3, 2});
        Rng rng = master.child(2);
        const int draws = 120'000;
        std::map<std::string, int> counts;
        for (int i = 0; i < draws; ++i) {
            counts[sample_permutation(layout, rng).serialize()] += 1;
        }
        double expected = draws / 12.0;
        double stat = 0.0;
        for (const auto& [key, c] : counts) {
            stat += (c - expected) * (c - expected) / expected;
        }
        stat += (12 - static_cast<int>(counts.size())) * expected;  // unseen cells
        double cutoff = chi2_quantile(0.999, 11);
        add_check(res, "chi-squared GOF over the 12 permutations of [3,2]",
                  counts.size() == 12 && stat < cutoff,
                  "stat " + fmt(stat) + " vs 0.999 quantile " + fmt(cutoff));
        res.details["gof_stat"] = stat;
        res.details["gof_cutoff"] = cutoff;
    }
    return res;
}

VerifyResult verify_scores() {
    VerifyResult res{"scores", true, "", nlohmann::ordered_json::object()};
    const ScoreSpec normal{ScoreKind::normal};
    const ScoreSpec wilcoxon{ScoreKind::wilcoxon};

    const std::vector<std::pair<int, double>> expected_factors{
        {2, 0.37}, {5, 0.56}, {10, 0.69}, {50, 0.89}, {200, 0.96}, {500, 0.98}};
    for (auto [ns, want] : expected_factors) {
        double got = score_table_variance(ns, normal);
        add_check(res, "normal-score variance factor at ns=" + std::to_string(ns),
                  std::abs(got - want) <= 0.005, fmt(got) + " vs " + fmt(want));
    }

    // reference integrals by 1e6-point midpoint quadrature
    const int points = 1'000'000;
    double cube = 0.0, quartic = 0.0;
    for (int i = 0; i < points; ++i) {
        double x = (i + 0.5) / points;
        cube += x * x * x;
        double q = std_normal_quantile(x);
        quartic += q * q * q * q;
    }
    cube /= points;
    quartic /= points;
    add_check(res, "cubic score integral = 1/4", std::abs(cube - 0.25) <= 1e-3, fmt(cube));
    add_check(res, "quartic normal-score integral = 3", std::abs(quartic - 3.0) <= 1e-3,
              fmt(quartic));

    // Riemann-sum domination for every stratum size up to 1000
    bool wil_ok = true, nor_ok = true;
    for (int ns = 1; ns <= 1000; ++ns) {
        double sw = 0.0, sn = 0.0;
        for (int i = 1; i <= ns; ++i) {
            double x = static_cast<double>(i) / (ns + 1);
            sw += x * x * x;
            double q = std_normal_quantile(x);
            sn += q * q * q * q;
        }
        wil_ok = wil_ok && (sw / (ns + 1) <= 0.25);
        nor_ok = nor_ok && (sn / (ns + 1) <= 3.0);
    }
    add_check(res, "rectangle sums below the cubic integral (ns <= 1000)", wil_ok, "");
    add_check(res, "rectangle sums below the quartic integral (ns <= 1000)", nor_ok, "");
    res.details["cube_integral"] = cube;
    res.details["quartic_integral"] = quartic;
    return res;
}

VerifyResult verify_finite_pop(std::uint64_t seed) {
    VerifyResult res{"finite-pop", true, "", nlohmann::ordered_json::object()};
    Rng master(seed);
    double worst_gap = 0.0;
    for (int inst = 0; inst < 100; ++inst) {
        Rng rng = master.child(inst);
        int strata = 1 + static_cast<int>(rng.below(4));
        std::vector<std::vector<double>> y(strata);
        std::vector<int> n1(strata);
        for (int s = 0; s < strata; ++s) {
            int ns = 3 + static_cast<int>(rng.below(6));
            y[s].resize(ns);
            for (double& v : y[s]) v = rng.normal();
            n1[s] = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(ns - 2)));
        }
        FinitePopBridge bridge = finite_pop_bridge(y, n1);
        worst_gap = std::max(worst_gap, std::abs(bridge.sigma_sq - bridge.v_sq) /
                                            std::max(1e-300, std::abs(bridge.v_sq)));
    }
    add_check(res, "variance identity on 100 random populations", worst_gap <= 1e-12,
              "worst relative gap " + fmt(worst_gap));
    res.details["worst_gap"] = worst_gap;
    return res;
}

VerifyResult run_verify_suite(const std::string& suite, int max_stratum, std::uint64_t seed) {
    std::vector<VerifyResult> parts;
    if (suite == "coupling") {
        parts.push_back(verify_coupling(max_stratum));
    } else if (suite == "uniformity") {
        parts.push_back(verify_uniformity(seed));
    } else if (suite == "scores") {
        parts.push_back(verify_scores());
    } else if (suite == "finite-pop") {
        parts.push_back(verify_finite_pop(seed));
    } else if (suite == "all") {
        parts.push_back(verify_coupling(max_stratum));
        parts.push_back(verify_uniformity(seed));
        parts.push_back(verify_scores());
        parts.push_back(verify_finite_pop(seed));
    } else {
        raise(ErrorCode::usage,
              "unknown suite '" + suite + "' (coupling|uniformity|scores|finite-pop|all)");
    }
    VerifyResult out{suite, true, "", nlohmann::ordered_json::object()};
    out.details["suites"] = nlohmann::ordered_json::array();
    for (const VerifyResult& part : parts) {
        out.passed = out.passed && part.passed;
        out.summary += "[" + part.suite + "]\n" + part.summary;
        nlohmann::ordered_json d = part.details;
        d["suite"] = part.suite;
        d["pass"] = part.passed;
        out.details["suites"].push_back(std::move(d));
    }
    out.details["pass"] = out.passed;
    out.summary += out.passed ? "all checks passed\n" : "SOME CHECKS FAILED\n";
    return out;
}

}  // namespace strata
