#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "strata/layout.hpp"

namespace strata {

// Column-name mapping for CSV ingestion. Instrument columns are matched by
// prefix followed by a 1-based index (z1, z2, ...).
struct CsvSchema {
    std::string stratum = "stratum";
    std::string response = "y";
    std::string dose = "d";
    std::string instrument_prefix = "z";
};

// Immutable dataset in canonical order: units re-sorted stratum-contiguously,
// stable within stratum; original row indices retained for reporting.
class StratifiedDataset {
public:
    StratifiedDataset(std::vector<std::string> stratum_labels_per_unit, std::vector<double> y,
                      std::optional<std::vector<double>> d, std::vector<double> z_rowmajor,
                      int k);

    const StrataLayout& layout() const { return *layout_; }
    int n() const { return layout_->total(); }
    int instrument_dim() const { return k_; }
    bool has_dose() const { return d_.has_value(); }

    std::span<const double> response() const { return y_; }
    std::span<const double> dose() const;
    // Row-major n x k instrument block (empty when k == 0).
    std::span<const double> instruments() const { return z_; }
    double instrument(int unit, int col) const { return z_[static_cast<std::size_t>(unit) * k_ + col]; }
    // The single instrument column, required k == 1.
    std::vector<double> instrument_column() const;

    const std::string& stratum_label(int s) const { return labels_[s]; }
    int original_row(int unit) const { return original_row_[unit]; }

    bool operator==(const StratifiedDataset& other) const;

    static StratifiedDataset load_csv(const std::string& path, const CsvSchema& schema = {});
    void save_csv(const std::string& path, const CsvSchema& schema = {}) const;

private:
    std::optional<StrataLayout> layout_;
    std::vector<std::string> labels_;       // one per stratum, canonical order
    std::vector<double> y_;
    std::optional<std::vector<double>> d_;
    std::vector<double> z_;                 // row-major n x k
    int k_ = 0;
    std::vector<int> original_row_;         // canonical unit -> input row (0-based)
};

}  // namespace strata
