#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "strata/permutation.hpp"

namespace strata {

// One draw of the coupled permutation triple (pi, pi_dagger, pi_star) with
// the index quadruples that generated it. All indices are local to the
// selected stratum, 0-based.
struct CouplingDraw {
    int stratum;
    int i1, i2, i3, i4;
    int j1, j2, j3, j4;
    StratifiedPermutation pi;
    StratifiedPermutation pi_dagger;
    StratifiedPermutation pi_star;
};

// Perturbs pi inside one randomly selected stratum (selected with probability
// ns/n): draws (I1,I2,J1) uniformly from the stratum cube, J2 uniformly off
// J1 when I1 != I2 (and equal to J1 otherwise), sets I3 = pi^-1(J1),
// I4 = pi^-1(J2), and returns pi_dagger = pi o tau and
// pi_star = pi_dagger o t(I1,I2), both acting only inside the stratum.
// Requires every stratum size >= 2.
CouplingDraw stein_coupling(const StratifiedPermutation& pi, const StrataLayout& layout,
                            Rng& rng);

// Deterministic variant used by the exact checker: all randomness supplied.
CouplingDraw make_coupling_draw(const StratifiedPermutation& pi, int stratum, int i1, int i2,
                                int j1, int j2);

struct CouplingCheckReport {
    std::string layout;
    std::uint64_t atoms = 0;           // weighted states enumerated
    std::uint64_t swap_identities = 0; // property (i) violations
    std::uint64_t index_invariants = 0;// I1=I2 <=> I3=I4 <=> J1=J2 violations
    std::uint64_t uniformity = 0;      // property (ii) marginal violations
    std::uint64_t index_independence = 0;  // property (ii) independence violations
    std::uint64_t dagger_independence = 0; // property (iii) violations
    std::uint64_t pair_uniformity = 0;     // property (iv) violations
    std::uint64_t cross_stratum = 0;   // pi_dagger/pi_star touched another stratum

    bool all_pass() const {
        return swap_identities == 0 && index_invariants == 0 && uniformity == 0 &&
               index_independence == 0 && dagger_independence == 0 &&
               pair_uniformity == 0 && cross_stratum == 0;
    }
    std::string summary() const;
};

// Verifies the coupling's distributional properties by exact enumeration of
// (pi, I1, I2, J1, J2) with integer weights, conditional on each selected
// stratum in turn:
//   (i)   pi_dagger(I1)=J2, pi_dagger(I2)=J1, pi_star(I1)=J1, pi_star(I2)=J2
//   (ii)  pi, pi_dagger, pi_star each uniform and independent of
//         (I1,I2,I3,I4)
//   (iii) pi_dagger independent of (I1,J1)
//   (iv)  (I_l, p(I_l)) uniform on the index square for l=1..4 and
//         p in {pi, pi_dagger, pi_star}
// plus the structural facts that the perturbations fix every other stratum.
// All comparisons are exact integer identities; any violation is counted.
// Requires all stratum sizes in [2, max_stratum] and prod ns! <= perm_cap.
CouplingCheckReport check_coupling_properties(const StrataLayout& layout,
                                              std::uint64_t perm_cap = 10'000,
                                              int max_stratum = 4);

}  // namespace strata
