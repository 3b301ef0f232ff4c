#include "strata/dataset.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "strata/io_util.hpp"

namespace strata {

StratifiedDataset::StratifiedDataset(std::vector<std::string> stratum_labels_per_unit,
                                     std::vector<double> y, std::optional<std::vector<double>> d,
                                     std::vector<double> z_rowmajor, int k)
    : k_(k) {
    const std::size_t n = stratum_labels_per_unit.size();
    if (n == 0) raise(ErrorCode::empty_input, "dataset: no rows");
    if (y.size() != n || (d && d->size() != n) ||
        z_rowmajor.size() != n * static_cast<std::size_t>(k)) {
        raise(ErrorCode::dimension, "dataset: column lengths differ");
    }

    // Canonical order: strata by first appearance, stable within stratum.
    std::map<std::string, int> stratum_index;
    std::vector<int> unit_stratum(n);
    for (std::size_t u = 0; u < n; ++u) {
        auto [it, inserted] = stratum_index.try_emplace(stratum_labels_per_unit[u],
                                                        static_cast<int>(labels_.size()));
        if (inserted) labels_.push_back(stratum_labels_per_unit[u]);
        unit_stratum[u] = it->second;
    }
    // map::try_emplace assigned ids in first-appearance order already, but the
    // map itself is sorted; labels_ preserves appearance order. Recover sizes.
    std::vector<int> sizes(labels_.size(), 0);
    for (int s : unit_stratum) sizes[s] += 1;
    layout_.emplace(sizes);

    std::vector<int> position(labels_.size());
    for (std::size_t s = 0; s < position.size(); ++s) position[s] = layout_->offset(static_cast<int>(s));

    y_.resize(n);
    if (d) d_.emplace(n);
    z_.resize(n * static_cast<std::size_t>(k));
    original_row_.resize(n);
    for (std::size_t u = 0; u < n; ++u) {
        int dest = position[unit_stratum[u]]++;
        y_[dest] = y[u];
        if (d) (*d_)[dest] = (*d)[u];
        for (int c = 0; c < k; ++c) {
            z_[static_cast<std::size_t>(dest) * k + c] = z_rowmajor[u * k + c];
        }
        original_row_[dest] = static_cast<int>(u);
    }
}

std::span<const double> StratifiedDataset::dose() const {
    if (!d_) raise(ErrorCode::schema, "dataset has no dose column");
    return *d_;
}

std::vector<double> StratifiedDataset::instrument_column() const {
    if (k_ != 1) {
        raise(ErrorCode::dimension, "expected a single instrument column, dataset has k=" +
                                        std::to_string(k_));
    }
    return {z_.begin(), z_.end()};
}

bool StratifiedDataset::operator==(const StratifiedDataset& other) const {
    return layout() == other.layout() && labels_ == other.labels_ && y_ == other.y_ &&
           d_ == other.d_ && z_ == other.z_ && k_ == other.k_;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_cell(const std::string& cell, int data_row, const std::string& column) {
    const char* begin = cell.c_str();
    char* end = nullptr;
    errno = 0;
    double v = std::strtod(begin, &end);
    // require full consumption modulo surrounding spaces
    while (end && *end == ' ') ++end;
    if (cell.empty() || end != begin + cell.size() || errno == ERANGE) {
        raise(ErrorCode::parse, "non-numeric value '" + cell + "' in column '" + column +
                                    "' at row " + std::to_string(data_row));
    }
    return v;
}

}  // namespace

StratifiedDataset StratifiedDataset::load_csv(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::io, "cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) raise(ErrorCode::empty_input, "empty file: " + path);

    std::vector<std::string> header = split_csv_line(line);
    int col_stratum = -1, col_y = -1, col_d = -1;
    std::vector<std::pair<int, int>> z_cols;  // (index among z, column position)
    for (std::size_t c = 0; c < header.size(); ++c) {
        const std::string& name = header[c];
        if (name == schema.stratum) col_stratum = static_cast<int>(c);
        else if (name == schema.response) col_y = static_cast<int>(c);
        else if (name == schema.dose) col_d = static_cast<int>(c);
        else if (name.starts_with(schema.instrument_prefix)) {
            std::string suffix = name.substr(schema.instrument_prefix.size());
            int idx = 0;
            auto [p, ec] = std::from_chars(suffix.data(), suffix.data() + suffix.size(), idx);
            if (ec == std::errc() && p == suffix.data() + suffix.size() && idx >= 1) {
                z_cols.emplace_back(idx, static_cast<int>(c));
            }
        }
    }
    if (col_stratum < 0) raise(ErrorCode::schema, "missing column '" + schema.stratum + "'");
    if (col_y < 0) raise(ErrorCode::schema, "missing column '" + schema.response + "'");
    std::sort(z_cols.begin(), z_cols.end());
    for (std::size_t i = 0; i < z_cols.size(); ++i) {
        if (z_cols[i].first != static_cast<int>(i) + 1) {
            raise(ErrorCode::schema, "instrument columns must be " + schema.instrument_prefix +
                                         "1.." + schema.instrument_prefix + "k without gaps");
        }
    }
    const int k = static_cast<int>(z_cols.size());

    std::vector<std::string> labels;
    std::vector<double> y;
    std::vector<double> d;
    std::vector<double> z;
    int data_row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++data_row;
        std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            raise(ErrorCode::parse, "row " + std::to_string(data_row) + " has " +
                                        std::to_string(cells.size()) + " cells, header has " +
                                        std::to_string(header.size()));
        }
        labels.push_back(cells[col_stratum]);
        y.push_back(parse_cell(cells[col_y], data_row, schema.response));
        if (col_d >= 0) d.push_back(parse_cell(cells[col_d], data_row, schema.dose));
        for (auto [idx, c] : z_cols) {
            z.push_back(parse_cell(cells[c], data_row, header[c]));
        }
    }
    if (data_row == 0) raise(ErrorCode::empty_input, "no data rows in " + path);

    std::optional<std::vector<double>> dose;
    if (col_d >= 0) dose = std::move(d);
    return StratifiedDataset(std::move(labels), std::move(y), std::move(dose), std::move(z), k);
}

void StratifiedDataset::save_csv(const std::string& path, const CsvSchema& schema) const {
    std::ostringstream out;
    out << schema.stratum << ',' << schema.response;
    if (d_) out << ',' << schema.dose;
    for (int c = 1; c <= k_; ++c) out << ',' << schema.instrument_prefix << c;
    out << '\n';
    out.precision(17);
    for (int s = 0; s < layout_->strata(); ++s) {
        for (int i = 0; i < layout_->size(s); ++i) {
            int u = layout_->offset(s) + i;
            out << labels_[s] << ',' << y_[u];
            if (d_) out << ',' << (*d_)[u];
            for (int c = 0; c < k_; ++c) out << ',' << z_[static_cast<std::size_t>(u) * k_ + c];
            out << '\n';
        }
    }
    write_file_atomic(path, out.str());
}

}  // namespace strata
