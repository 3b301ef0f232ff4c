#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "strata/layout.hpp"
#include "strata/rng.hpp"

namespace strata {

// A permutation that maps each stratum to itself. Stored as per-stratum
// forward maps over local indices 0..ns-1, with the inverse maps cached.
class StratifiedPermutation {
public:
    static StratifiedPermutation identity(const StrataLayout& layout);

    // Takes ownership of per-stratum forward maps laid out contiguously
    // (local images, 0-based). Validates bijectivity per stratum.
    StratifiedPermutation(const StrataLayout& layout, std::vector<int> forward);

    const StrataLayout& layout() const { return layout_; }

    // pi_s(i), local 0-based.
    int image(int s, int i) const { return forward_[layout_.offset(s) + i]; }
    // pi_s^{-1}(j), local 0-based.
    int preimage(int s, int j) const { return inverse_[layout_.offset(s) + j]; }

    // Global destination of canonical unit u: offset(s) + pi_s(local(u)).
    int global_image(int u) const {
        int s = layout_.stratum_of(u);
        return layout_.offset(s) + forward_[u];
    }

    std::span<const int> forward(int s) const {
        return {forward_.data() + layout_.offset(s), static_cast<std::size_t>(layout_.size(s))};
    }
    std::span<const int> forward_all() const { return forward_; }

    bool is_identity() const;

    // One line per stratum, space-separated 1-based images (golden-file format).
    std::string serialize() const;

    bool operator==(const StratifiedPermutation& other) const {
        return forward_ == other.forward_;
    }

private:
    StratifiedPermutation(const StrataLayout& layout) : layout_(layout) {}
    void rebuild_inverse();

    StrataLayout layout_;
    std::vector<int> forward_;   // local image per unit
    std::vector<int> inverse_;   // local preimage per unit

    friend StratifiedPermutation sample_permutation(const StrataLayout&, Rng&);
    friend class PermutationEnumerator;
};

// Unbiased within-stratum Fisher-Yates shuffle; strata are independent.
StratifiedPermutation sample_permutation(const StrataLayout& layout, Rng& rng);

// Number of stratified permutations, or Error(too_large) above `cap`
// (the error message carries the log-count).
std::uint64_t permutation_count(const StrataLayout& layout, std::uint64_t cap = 1'000'000);

// Visits every element of the permutation group exactly once, lexicographic
// in (stratum, within-stratum image sequence) order with the last stratum
// moving fastest. Starts at the identity.
class PermutationEnumerator {
public:
    explicit PermutationEnumerator(const StrataLayout& layout, std::uint64_t cap = 1'000'000);

    const StratifiedPermutation& current() const { return current_; }
    std::uint64_t count() const { return count_; }

    // Advances to the successor; false once the sequence wraps around.
    bool advance();

private:
    StratifiedPermutation current_;
    std::uint64_t count_;
};

// Convenience driver for enumeration oracles.
void for_each_permutation(const StrataLayout& layout,
                          const std::function<void(const StratifiedPermutation&)>& fn,
                          std::uint64_t cap = 1'000'000);

}  // namespace strata
