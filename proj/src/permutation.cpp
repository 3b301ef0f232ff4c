#include "strata/permutation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

namespace strata {

StratifiedPermutation StratifiedPermutation::identity(const StrataLayout& layout) {
    StratifiedPermutation p(layout);
    p.forward_.resize(layout.total());
    for (int s = 0; s < layout.strata(); ++s) {
        std::iota(p.forward_.begin() + layout.offset(s),
                  p.forward_.begin() + layout.offset(s) + layout.size(s), 0);
    }
    p.inverse_ = p.forward_;
    return p;
}

StratifiedPermutation::StratifiedPermutation(const StrataLayout& layout, std::vector<int> forward)
    : layout_(layout), forward_(std::move(forward)) {
    require_length(forward_.size(), layout_, "StratifiedPermutation");
    inverse_.assign(forward_.size(), -1);
    for (int s = 0; s < layout_.strata(); ++s) {
        int off = layout_.offset(s);
        int ns = layout_.size(s);
        for (int i = 0; i < ns; ++i) {
            int j = forward_[off + i];
            if (j < 0 || j >= ns || inverse_[off + j] != -1) {
                raise(ErrorCode::domain,
                      "StratifiedPermutation: stratum " + std::to_string(s + 1) +
                          " image is not a bijection");
            }
            inverse_[off + j] = i;
        }
    }
}

void StratifiedPermutation::rebuild_inverse() {
    inverse_.assign(forward_.size(), 0);
    for (int s = 0; s < layout_.strata(); ++s) {
        int off = layout_.offset(s);
        for (int i = 0; i < layout_.size(s); ++i) inverse_[off + forward_[off + i]] = i;
    }
}

bool StratifiedPermutation::is_identity() const {
    for (int s = 0; s < layout_.strata(); ++s) {
        int off = layout_.offset(s);
        for (int i = 0; i < layout_.size(s); ++i) {
            if (forward_[off + i] != i) return false;
        }
    }
    return true;
}

std::string StratifiedPermutation::serialize() const {
    std::string out;
    for (int s = 0; s < layout_.strata(); ++s) {
        int off = layout_.offset(s);
        for (int i = 0; i < layout_.size(s); ++i) {
            if (i) out += ' ';
            out += std::to_string(forward_[off + i] + 1);
        }
        out += '\n';
    }
    return out;
}

StratifiedPermutation sample_permutation(const StrataLayout& layout, Rng& rng) {
    StratifiedPermutation p = StratifiedPermutation::identity(layout);
    for (int s = 0; s < layout.strata(); ++s) {
        int off = layout.offset(s);
        int ns = layout.size(s);
        for (int i = ns - 1; i > 0; --i) {
            int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i) + 1));
            std::swap(p.forward_[off + i], p.forward_[off + j]);
        }
    }
    p.rebuild_inverse();
    return p;
}

std::uint64_t permutation_count(const StrataLayout& layout, std::uint64_t cap) {
    double log_count = layout.log_perm_count();
    if (log_count > std::log(static_cast<double>(cap)) + 1e-9) {
        raise(ErrorCode::too_large,
              "enumeration too large: log permutation count " + std::to_string(log_count) +
                  " exceeds cap " + std::to_string(cap));
    }
    std::uint64_t count = 1;
    for (int s = 0; s < layout.strata(); ++s) {
        for (int m = 2; m <= layout.size(s); ++m) count *= static_cast<std::uint64_t>(m);
    }
    return count;
}

PermutationEnumerator::PermutationEnumerator(const StrataLayout& layout, std::uint64_t cap)
    : current_(StratifiedPermutation::identity(layout)), count_(permutation_count(layout, cap)) {}

bool PermutationEnumerator::advance() {
    const StrataLayout& layout = current_.layout_;
    // Odometer: last stratum is the least significant digit.
    for (int s = layout.strata() - 1; s >= 0; --s) {
        auto begin = current_.forward_.begin() + layout.offset(s);
        auto end = begin + layout.size(s);
        if (std::next_permutation(begin, end)) {
            current_.rebuild_inverse();
            return true;
        }
        // wrapped to identity in stratum s; carry on to the previous stratum
    }
    current_.rebuild_inverse();
    return false;
}

void for_each_permutation(const StrataLayout& layout,
                          const std::function<void(const StratifiedPermutation&)>& fn,
                          std::uint64_t cap) {
    PermutationEnumerator it(layout, cap);
    do {
        fn(it.current());
    } while (it.advance());
}

}  // namespace strata
