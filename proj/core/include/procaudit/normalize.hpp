#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <string>

#include "procaudit/dataset.hpp"
#include "procaudit/matrix.hpp"

namespace procaudit {

// Per-column min/max fitted on training data, in feature column order.
// Inference reuses the fitted values, so train- and predict-time scaling
// match exactly.
struct NormalizationStats {
    std::array<double, kFeatureCount> min{};
    std::array<double, kFeatureCount> max{};

    bool operator==(const NormalizationStats&) const = default;
};

// Exact column-wise min and max over the given rows (all rows by default).
// Throws ArgumentError on an empty selection.
NormalizationStats fit(const Dataset& ds);
NormalizationStats fit(const Dataset& ds, std::span<const std::size_t> rows);

// (x - min) / (max - min) for one cell. Degenerate columns (max == min) map
// to 0.0; out-of-range values clamp to [0, 1].
double normalize_cell(double x, double col_min, double col_max);

// Inverse of normalize_cell on non-degenerate columns: n * (max - min) + min.
double denormalize_cell(double n, double col_min, double col_max);

// Normalized feature matrix for the selected rows.
Matrix transform(const Dataset& ds, const NormalizationStats& stats);
Matrix transform(const Dataset& ds, std::span<const std::size_t> rows,
                 const NormalizationStats& stats);
void transform_row(const ProcurementRecord& r, const NormalizationStats& stats,
                   std::span<double> out);

// Small versioned text format, one `column min max` line per feature.
// Lossless: load(save(s)) == s bit for bit. Corrupt, truncated or
// version-mismatched input throws FormatError.
void save_stats(const NormalizationStats& stats, std::ostream& out);
NormalizationStats load_stats(std::istream& in);

} // namespace procaudit
