#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "strata/error.hpp"

namespace strata {

// Sizes of the strata and the contiguous index ranges they occupy.
// Units are always indexed 0..n-1 with stratum s owning
// [offset(s), offset(s)+size(s)).
class StrataLayout {
public:
    explicit StrataLayout(std::vector<int> sizes) : sizes_(std::move(sizes)) {
        if (sizes_.empty()) {
            raise(ErrorCode::domain, "StrataLayout: at least one stratum required");
        }
        offsets_.reserve(sizes_.size() + 1);
        offsets_.push_back(0);
        for (int ns : sizes_) {
            if (ns < 1) raise(ErrorCode::domain, "StrataLayout: stratum sizes must be >= 1");
            offsets_.push_back(offsets_.back() + ns);
        }
    }

    int strata() const { return static_cast<int>(sizes_.size()); }
    int total() const { return offsets_.back(); }
    int size(int s) const { return sizes_[s]; }
    int offset(int s) const { return offsets_[s]; }
    std::span<const int> sizes() const { return sizes_; }

    int stratum_of(int unit) const {
        int s = 0;
        while (offsets_[s + 1] <= unit) ++s;
        return s;
    }

    // log ( prod_s ns! ), computed in log space so it never overflows.
    double log_perm_count() const {
        double total = 0.0;
        for (int ns : sizes_) total += std::lgamma(static_cast<double>(ns) + 1.0);
        return total;
    }

    int singleton_count() const {
        int c = 0;
        for (int ns : sizes_) c += (ns == 1);
        return c;
    }

    bool operator==(const StrataLayout& other) const { return sizes_ == other.sizes_; }

    std::string describe() const {
        std::string out = "[";
        for (std::size_t i = 0; i < sizes_.size(); ++i) {
            if (i) out += ",";
            out += std::to_string(sizes_[i]);
        }
        return out + "]";
    }

private:
    std::vector<int> sizes_;
    std::vector<int> offsets_;
};

inline void require_length(std::size_t got, const StrataLayout& layout, const char* what) {
    if (got != static_cast<std::size_t>(layout.total())) {
        raise(ErrorCode::dimension, std::string(what) + ": expected length " +
                                        std::to_string(layout.total()) + ", got " +
                                        std::to_string(got));
    }
}

}  // namespace strata
