#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "strata/dataset.hpp"
#include "strata/linalg.hpp"
#include "strata/rng.hpp"

namespace strata {

// Names of the four rejection-rate columns, in emission order.
inline constexpr std::array<const char*, 4> kSimStatNames{"B_N_star", "B_W_star", "B_N", "B_W"};

struct SimConfig {
    int n = 400;
    int k = 1;
    std::vector<int> r_values{2, 5, 10, 25, 80};
    int replications = 5000;
    double rho = 0.5;        // endogeneity of the dose equation
    double lambda = 9.0;     // identification strength
    double beta0 = 0.0;      // null value under test (the data are generated at beta = 0)
    std::uint64_t seed = 0;
    int threads = 1;
    double alpha = 0.05;
};

// Instruments and stratification drawn once and held fixed across
// replications. Units are stored in canonical (stratum-contiguous) order;
// strata are the level sets of the grid variable, ascending.
struct SimDesign {
    int n = 0;
    int k = 0;
    int r = 0;
    int grid = 0;                  // number of grid points n/r
    Matrix z;                      // n x k, heavy-tailed with unit covariance scale
    std::vector<int> x_numerator;  // per-unit grid numerator (x = numerator/grid)
    StrataLayout layout{std::vector<int>{1}};
    int max_stratum = 0;
};

SimDesign generate_design(int n, int k, int r, Rng& rng);

struct SimReplication {
    std::vector<double> y;
    std::vector<double> d;
};

// One draw of the outcome/dose pair at the null (all structural and nuisance
// coefficients zero): heavy-tailed disturbances u, e; d = z'pi + rho u +
// sqrt(1-rho^2) e; y = u.
SimReplication simulate_replication(const SimDesign& design, double rho, double lambda, Rng& rng);

// Materializes one replication as a dataset (strata labelled by their exact
// grid fraction).
StratifiedDataset make_dataset(const SimDesign& design, const SimReplication& rep);

struct SimCell {
    int k = 0;
    int r = 0;
    int strata = 0;
    int max_stratum = 0;
    int replications = 0;
    std::uint64_t seed = 0;
    std::array<double, 4> rejection_pct{};  // order of kSimStatNames
    int errors = 0;                         // replications lost to propagated errors
};

// Size study over the r grid: null rejection rates of the four statistics at
// level alpha using the chi-squared critical value. Deterministic given
// (seed, n, k, r grid, replications); invariant to the thread count.
std::vector<SimCell> rejection_table(const SimConfig& config);

// CSV: k,r,stat,rejection_pct,max_ns,S,reps,seed (one row per cell and stat).
std::string rejection_table_csv(const std::vector<SimCell>& cells);

}  // namespace strata
