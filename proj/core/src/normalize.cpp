#include "procaudit/normalize.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <vector>

#include "procaudit/errors.hpp"
#include "procaudit/textio.hpp"

namespace procaudit {

namespace {
constexpr std::string_view kStatsMagic = "procaudit-norm-stats";
constexpr std::string_view kStatsVersion = "v1";
} // namespace

NormalizationStats fit(const Dataset& ds) {
    std::vector<std::size_t> all(ds.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return fit(ds, all);
}

NormalizationStats fit(const Dataset& ds, std::span<const std::size_t> rows) {
    if (rows.empty()) {
        throw ArgumentError("normalize.fit: cannot fit on an empty dataset");
    }
    NormalizationStats stats;
    const auto first = feature_row(ds.records[rows[0]]);
    std::copy(first.begin(), first.end(), stats.min.begin());
    std::copy(first.begin(), first.end(), stats.max.begin());
    for (std::size_t k = 1; k < rows.size(); ++k) {
        const auto row = feature_row(ds.records[rows[k]]);
        for (std::size_t c = 0; c < kFeatureCount; ++c) {
            stats.min[c] = std::min(stats.min[c], row[c]);
            stats.max[c] = std::max(stats.max[c], row[c]);
        }
    }
    return stats;
}

double normalize_cell(double x, double col_min, double col_max) {
    if (col_max == col_min) return 0.0;
    const double n = (x - col_min) / (col_max - col_min);
    return std::clamp(n, 0.0, 1.0);
}

double denormalize_cell(double n, double col_min, double col_max) {
    return n * (col_max - col_min) + col_min;
}

void transform_row(const ProcurementRecord& r, const NormalizationStats& stats,
                   std::span<double> out) {
    const auto row = feature_row(r);
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
        out[c] = normalize_cell(row[c], stats.min[c], stats.max[c]);
    }
}

Matrix transform(const Dataset& ds, const NormalizationStats& stats) {
    std::vector<std::size_t> all(ds.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return transform(ds, all, stats);
}

Matrix transform(const Dataset& ds, std::span<const std::size_t> rows,
                 const NormalizationStats& stats) {
    Matrix m(rows.size(), kFeatureCount);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        transform_row(ds.records[rows[i]], stats, m.row(i));
    }
    return m;
}

void save_stats(const NormalizationStats& stats, std::ostream& out) {
    out << kStatsMagic << ' ' << kStatsVersion << '\n';
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
        out << kFeatureNames[c] << ' ' << format_double(stats.min[c]) << ' '
            << format_double(stats.max[c]) << '\n';
    }
}

NormalizationStats load_stats(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw FormatError("stats: empty stream");
    }
    std::istringstream header(line);
    std::string magic, version;
    header >> magic >> version;
    if (magic != kStatsMagic || version != kStatsVersion) {
        throw FormatError("stats: unrecognized header '" + line + "'");
    }
    NormalizationStats stats;
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
        if (!std::getline(in, line)) {
            throw FormatError("stats: truncated after " + std::to_string(c) +
                              " columns");
        }
        std::istringstream row(line);
        std::string name, mn, mx;
        if (!(row >> name >> mn >> mx)) {
            throw FormatError("stats: malformed line '" + line + "'");
        }
        if (name != kFeatureNames[c]) {
            throw FormatError("stats: expected column " +
                              std::string(kFeatureNames[c]) + ", found " + name);
        }
        stats.min[c] = parse_double(mn, "stats " + name + " min");
        stats.max[c] = parse_double(mx, "stats " + name + " max");
        if (stats.min[c] > stats.max[c]) {
            throw FormatError("stats: min > max for column " + name);
        }
    }
    return stats;
}

} // namespace procaudit
