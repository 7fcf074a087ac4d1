#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "procaudit/matrix.hpp"

namespace procaudit {

// One procurement event. The serial/group/organization/material/supplier
// fields are raw numeric identifiers straight from the source system; ft is
// the fraud-type class id, 0 meaning no fraud. ft is the label of both
// classification tasks and is never part of the feature columns.
struct ProcurementRecord {
    std::int64_t psn = 0; // procurement serial number
    std::int64_t pgn = 0; // procurement group number
    std::int64_t pon = 0; // procurement organization number
    std::int64_t mgn = 0; // material group number
    double np = 0.0;      // net price per unit
    double pa = 0.0;      // purchase amount (units)
    double ptp = 0.0;     // procurement total price
    int ft = 0;           // fraud type, 0 = clean
    std::int64_t ssn = 0; // supplier serial number
};

inline constexpr std::size_t kFeatureCount = 8;

// Fixed feature column order. FT is deliberately absent.
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "psn", "pgn", "pon", "mgn", "np", "pa", "ptp", "ssn"};

// CSV interchange header, in exact file order.
inline constexpr std::string_view kCsvHeader = "PSN,PGN,PON,MGN,NP,PA,PTP,FT,SSN";
inline constexpr std::string_view kCsvHeaderNoFt = "PSN,PGN,PON,MGN,NP,PA,PTP,SSN";

std::array<double, kFeatureCount> feature_row(const ProcurementRecord& r);

// Ordered, immutable-by-convention collection of records.
struct Dataset {
    std::vector<ProcurementRecord> records;

    std::size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }

    // n x 8 matrix of raw (unnormalized) features, row order preserved.
    Matrix feature_matrix() const;

    int max_fraud_type() const;
    std::size_t count_fraud() const; // records with ft != 0
    std::size_t count_clean() const;
};

enum class LabelMode { binary, multiclass };

// Labels for one task plus the dataset rows they refer to.
//   binary:     every row; label 1 exactly when ft != 0; class_count 2.
//   multiclass: rows with ft != 0; label ft - 1; class_count = max ft.
// include_clean additionally keeps ft == 0 rows in multiclass with label ft
// (class ids shift to 0..max ft).
struct LabelView {
    std::vector<int> labels;
    std::vector<std::size_t> row_indices;
    int class_count = 0;
};

LabelView derive_labels(const Dataset& ds, LabelMode mode, bool include_clean = false);

struct CsvOptions {
    bool require_ft = true; // relaxed by `predict` for unlabeled files
};

struct CsvData {
    Dataset dataset;
    bool has_ft = true;
};

// Parses the canonical CSV. Header must match kCsvHeader exactly (or
// kCsvHeaderNoFt when require_ft is false). Throws SchemaError on a bad
// header (naming the missing column), ParseError citing row and column for a
// bad cell, ValidationError for negative np/pa/ptp or ft.
CsvData parse_csv(std::istream& in, const CsvOptions& options = {});

void write_csv(const Dataset& ds, std::ostream& out);

// Convenience file wrappers; throw IoError when the file cannot be opened.
CsvData read_csv_file(const std::string& path, const CsvOptions& options = {});
void write_csv_file(const Dataset& ds, const std::string& path);

// Downsamples the majority binary class (seeded, uniform, without
// replacement) until fraud and clean counts are equal. Relative record order
// is preserved. Throws ValidationError when only one class is present.
Dataset balance(const Dataset& ds, std::uint64_t seed);

} // namespace procaudit
