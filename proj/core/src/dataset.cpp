#include "procaudit/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "procaudit/errors.hpp"
#include "procaudit/rng.hpp"
#include "procaudit/textio.hpp"

namespace procaudit {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            out.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

void check_header(std::string_view got, std::string_view want) {
    const auto got_cols = split_fields(got);
    const auto want_cols = split_fields(want);
    // Name the first missing column before complaining about anything else.
    for (const auto& w : want_cols) {
        bool found = false;
        for (const auto& g : got_cols) {
            if (trim(g) == w) { found = true; break; }
        }
        if (!found) {
            throw SchemaError("csv: missing column " + std::string(w));
        }
    }
    if (got_cols.size() != want_cols.size()) {
        throw SchemaError("csv: expected " + std::to_string(want_cols.size()) +
                          " columns, found " + std::to_string(got_cols.size()));
    }
    for (std::size_t i = 0; i < want_cols.size(); ++i) {
        if (trim(got_cols[i]) != want_cols[i]) {
            throw SchemaError("csv: column " + std::to_string(i + 1) +
                              " must be " + std::string(want_cols[i]) +
                              ", found '" + std::string(trim(got_cols[i])) + "'");
        }
    }
}

std::string cell_context(std::size_t data_row, std::string_view column) {
    return "csv row " + std::to_string(data_row) + ", column " + std::string(column);
}

} // namespace

std::array<double, kFeatureCount> feature_row(const ProcurementRecord& r) {
    return {static_cast<double>(r.psn), static_cast<double>(r.pgn),
            static_cast<double>(r.pon), static_cast<double>(r.mgn),
            r.np, r.pa, r.ptp, static_cast<double>(r.ssn)};
}

Matrix Dataset::feature_matrix() const {
    Matrix m(records.size(), kFeatureCount);
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto row = feature_row(records[i]);
        std::copy(row.begin(), row.end(), m.row(i).begin());
    }
    return m;
}

int Dataset::max_fraud_type() const {
    int mx = 0;
    for (const auto& r : records) mx = std::max(mx, r.ft);
    return mx;
}

std::size_t Dataset::count_fraud() const {
    std::size_t n = 0;
    for (const auto& r : records) n += (r.ft != 0);
    return n;
}

std::size_t Dataset::count_clean() const { return size() - count_fraud(); }

LabelView derive_labels(const Dataset& ds, LabelMode mode, bool include_clean) {
    LabelView view;
    if (mode == LabelMode::binary) {
        view.class_count = 2;
        view.labels.reserve(ds.size());
        view.row_indices.reserve(ds.size());
        for (std::size_t i = 0; i < ds.size(); ++i) {
            view.labels.push_back(ds.records[i].ft != 0 ? 1 : 0);
            view.row_indices.push_back(i);
        }
        return view;
    }

    const int max_ft = ds.max_fraud_type();
    if (max_ft == 0) {
        throw ValidationError(
            "derive_labels: multiclass labels need at least one fraud record");
    }
    if (include_clean) {
        view.class_count = max_ft + 1;
        for (std::size_t i = 0; i < ds.size(); ++i) {
            view.labels.push_back(ds.records[i].ft);
            view.row_indices.push_back(i);
        }
    } else {
        view.class_count = max_ft;
        for (std::size_t i = 0; i < ds.size(); ++i) {
            if (ds.records[i].ft != 0) {
                view.labels.push_back(ds.records[i].ft - 1);
                view.row_indices.push_back(i);
            }
        }
    }
    return view;
}

CsvData parse_csv(std::istream& in, const CsvOptions& options) {
    std::string line;
    if (!std::getline(in, line)) {
        throw SchemaError("csv: empty input, header row required");
    }
    bool has_ft = true;
    try {
        check_header(trim(line), kCsvHeader);
    } catch (const SchemaError&) {
        if (options.require_ft) throw;
        check_header(trim(line), kCsvHeaderNoFt);
        has_ft = false;
    }

    CsvData out;
    out.has_ft = has_ft;
    const std::size_t ncols = has_ft ? 9 : 8;
    std::size_t data_row = 0;
    while (std::getline(in, line)) {
        const std::string_view stripped = trim(line);
        if (stripped.empty()) continue;
        ++data_row;
        const auto cells = split_fields(stripped);
        if (cells.size() != ncols) {
            throw ParseError("csv row " + std::to_string(data_row) + ": expected " +
                             std::to_string(ncols) + " cells, found " +
                             std::to_string(cells.size()));
        }
        ProcurementRecord r;
        std::size_t c = 0;
        r.psn = parse_int64(cells[c++], cell_context(data_row, "PSN"));
        r.pgn = parse_int64(cells[c++], cell_context(data_row, "PGN"));
        r.pon = parse_int64(cells[c++], cell_context(data_row, "PON"));
        r.mgn = parse_int64(cells[c++], cell_context(data_row, "MGN"));
        r.np = parse_double(cells[c++], cell_context(data_row, "NP"));
        r.pa = parse_double(cells[c++], cell_context(data_row, "PA"));
        r.ptp = parse_double(cells[c++], cell_context(data_row, "PTP"));
        if (has_ft) {
            const std::int64_t ft = parse_int64(cells[c++], cell_context(data_row, "FT"));
            if (ft < 0) {
                throw ValidationError("csv row " + std::to_string(data_row) +
                                      ": FT must be >= 0");
            }
            r.ft = static_cast<int>(ft);
        }
        r.ssn = parse_int64(cells[c++], cell_context(data_row, "SSN"));
        if (r.np < 0.0 || r.pa < 0.0 || r.ptp < 0.0) {
            throw ValidationError("csv row " + std::to_string(data_row) +
                                  ": NP, PA and PTP must be >= 0");
        }
        out.dataset.records.push_back(r);
    }
    return out;
}

void write_csv(const Dataset& ds, std::ostream& out) {
    out << kCsvHeader << '\n';
    for (const auto& r : ds.records) {
        out << r.psn << ',' << r.pgn << ',' << r.pon << ',' << r.mgn << ','
            << format_double(r.np) << ',' << format_double(r.pa) << ','
            << format_double(r.ptp) << ',' << r.ft << ',' << r.ssn << '\n';
    }
}

CsvData read_csv_file(const std::string& path, const CsvOptions& options) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return parse_csv(in, options);
}

void write_csv_file(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    write_csv(ds, out);
    out.flush();
    if (!out) throw IoError("write failed for " + path);
}

Dataset balance(const Dataset& ds, std::uint64_t seed) {
    std::vector<std::size_t> fraud;
    std::vector<std::size_t> clean;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        (ds.records[i].ft != 0 ? fraud : clean).push_back(i);
    }
    if (fraud.empty() || clean.empty()) {
        throw ValidationError("balance: both classes must be present");
    }
    if (fraud.size() == clean.size()) return ds;

    auto& majority = fraud.size() > clean.size() ? fraud : clean;
    const std::size_t keep = std::min(fraud.size(), clean.size());
    std::mt19937_64 rng(seed);
    shuffle_in_place(majority, rng);
    majority.resize(keep);

    std::vector<std::size_t> kept;
    kept.reserve(2 * keep);
    kept.insert(kept.end(), fraud.begin(), fraud.end());
    kept.insert(kept.end(), clean.begin(), clean.end());
    std::sort(kept.begin(), kept.end());

    Dataset out;
    out.records.reserve(kept.size());
    for (std::size_t i : kept) out.records.push_back(ds.records[i]);
    return out;
}

} // namespace procaudit
