#include "procaudit/synthgen.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "procaudit/errors.hpp"
#include "procaudit/rng.hpp"
#include "procaudit/textio.hpp"

namespace procaudit {

namespace {

// Flagged id ranges sit at the top of their pools with a gap below them, so
// the two populations stay separated after min-max scaling.
struct IdRanges {
    std::int64_t ssn_black_start = 0;
    std::int64_t ssn_safe_max = 0;
    std::int64_t pgn_offender_start = 0;
    std::int64_t pgn_safe_max = 0;
};

IdRanges compute_ranges(const GeneratorConfig& cfg) {
    IdRanges r;
    const auto ssn_pool = static_cast<std::int64_t>(cfg.pools.ssn);
    const auto black_count = std::max<std::int64_t>(
        1, static_cast<std::int64_t>(
               std::floor(static_cast<double>(ssn_pool) *
                          cfg.blacklist_fraction)));
    r.ssn_black_start = ssn_pool - black_count + 1;
    r.ssn_safe_max = r.ssn_black_start - std::max<std::int64_t>(
                                             1, ssn_pool / 4) -
                     1;

    const auto pgn_pool = static_cast<std::int64_t>(cfg.pools.pgn);
    const auto offender_count = std::max<std::int64_t>(1, pgn_pool / 8);
    r.pgn_offender_start = pgn_pool - offender_count + 1;
    r.pgn_safe_max = r.pgn_offender_start -
                     std::max<std::int64_t>(1, pgn_pool / 4) - 1;
    return r;
}

std::int64_t draw_id(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(bounded_u64(
                    rng, static_cast<std::uint64_t>(hi - lo + 1)));
}

std::size_t planted_fraud_count(const GeneratorConfig& cfg) {
    return static_cast<std::size_t>(std::llround(
        static_cast<double>(cfg.n) * cfg.fraud_ratio));
}

} // namespace

void GeneratorConfig::validate() const {
    if (n == 0) throw ArgumentError("generator: n must be > 0");
    if (!(fraud_ratio > 0.0 && fraud_ratio < 1.0)) {
        throw ArgumentError("generator: fraud_ratio must be in (0, 1)");
    }
    const std::size_t frauds = planted_fraud_count(*this);
    if (frauds == 0 || frauds >= n) {
        throw ArgumentError(
            "generator: fraud_ratio leaves no records of one class at n=" +
            std::to_string(n));
    }
    if (k_fraud < 2 || k_fraud > 5) {
        throw ArgumentError("generator: k_fraud must be in [2, 5]");
    }
    if (!(label_noise >= 0.0 && label_noise < 0.5)) {
        throw ArgumentError("generator: label_noise must be in [0, 0.5)");
    }
    if (!(blacklist_fraction > 0.0 && blacklist_fraction < 1.0)) {
        throw ArgumentError("generator: blacklist_fraction must be in (0, 1)");
    }
    if (pools.pon == 0 || pools.mgn == 0) {
        throw ArgumentError("generator: pon and mgn pools must be > 0");
    }
    const IdRanges ranges = compute_ranges(*this);
    if (ranges.ssn_safe_max < 1) {
        throw ArgumentError(
            "generator: supplier pool too small for a blacklist margin");
    }
    if (ranges.pgn_safe_max < 1) {
        throw ArgumentError(
            "generator: purchasing-group pool too small for an offender "
            "margin");
    }
}

ArchetypeRules rules_for(const GeneratorConfig& cfg) {
    cfg.validate();
    const IdRanges ranges = compute_ranges(cfg);
    ArchetypeRules rules;
    rules.ssn_blacklist_start = ranges.ssn_black_start;
    rules.pgn_offender_start = ranges.pgn_offender_start;
    return rules;
}

double price_base(std::int64_t mgn) {
    return 20.0 * std::exp(0.055 * static_cast<double>(mgn));
}

int archetype_of(const ProcurementRecord& r, const ArchetypeRules& rules) {
    if (r.ssn >= rules.ssn_blacklist_start) return 1;
    if (r.np > rules.np_ratio_threshold * price_base(r.mgn)) return 2;
    if (r.pa > rules.pa_threshold) return 3;
    const double expected = r.np * r.pa;
    if (expected > 0.0 &&
        std::abs(r.ptp / expected - 1.0) > rules.ptp_rel_threshold) {
        return 4;
    }
    if (r.pgn >= rules.pgn_offender_start) return 5;
    return 0;
}

Dataset generate(const GeneratorConfig& cfg) {
    cfg.validate();
    const IdRanges ranges = compute_ranges(cfg);
    const auto k = static_cast<std::uint64_t>(cfg.k_fraud);

    std::mt19937_64 rng(cfg.seed);
    std::vector<char> fraud_slot(cfg.n, 0);
    std::fill_n(fraud_slot.begin(),
                static_cast<std::ptrdiff_t>(planted_fraud_count(cfg)),
                char{1});
    shuffle_in_place(fraud_slot, rng);

    Dataset ds;
    ds.records.reserve(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i) {
        const int t =
            fraud_slot[i] ? static_cast<int>(1 + bounded_u64(rng, k)) : 0;
        ProcurementRecord rec;
        rec.psn = 100000 + static_cast<std::int64_t>(i);
        rec.pgn = t == 5 ? draw_id(rng, ranges.pgn_offender_start,
                                   static_cast<std::int64_t>(cfg.pools.pgn))
                         : draw_id(rng, 1, ranges.pgn_safe_max);
        rec.pon = draw_id(rng, 1, static_cast<std::int64_t>(cfg.pools.pon));
        rec.mgn = draw_id(rng, 1, static_cast<std::int64_t>(cfg.pools.mgn));
        rec.ssn = t == 1 ? draw_id(rng, ranges.ssn_black_start,
                                   static_cast<std::int64_t>(cfg.pools.ssn))
                         : draw_id(rng, 1, ranges.ssn_safe_max);
        const double base = price_base(rec.mgn);
        if (t == 2) {
            rec.np = uniform_in(rng, 4.0, 7.0) * base;
        } else if (t == 3) {
            rec.np = uniform_in(rng, 0.2, 0.5) * base;
        } else {
            rec.np = uniform_in(rng, 0.6, 1.4) * base;
        }
        rec.pa = t == 3 ? uniform_in(rng, 20000.0, 50000.0)
                        : uniform_in(rng, 1.0, 2000.0);
        const double factor = t == 4 ? uniform_in(rng, 6.0, 12.0)
                                     : 1.0 + uniform_in(rng, -0.01, 0.01);
        rec.ptp = rec.np * rec.pa * factor;
        rec.ft = t;
        ds.records.push_back(rec);
    }

    if (cfg.label_noise > 0.0) {
        for (ProcurementRecord& rec : ds.records) {
            if (unit_uniform(rng) < cfg.label_noise) {
                rec.ft = rec.ft == 0
                             ? static_cast<int>(1 + bounded_u64(rng, k))
                             : 0;
            }
        }
    }
    return ds;
}

double bayes_accuracy(const GeneratorConfig& cfg, LabelMode mode) {
    cfg.validate();
    const double e = cfg.label_noise;
    if (mode == LabelMode::binary) return 1.0 - e;
    const double r = cfg.fraud_ratio;
    const double k = static_cast<double>(cfg.k_fraud);
    const double kept_fraud = r * (1.0 - e);
    const double flipped_clean = (1.0 - r) * e;
    return (kept_fraud + flipped_clean / k) / (kept_fraud + flipped_clean);
}

GeneratorConfig parse_generator_config(const std::string& text) {
    GeneratorConfig cfg;
    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line{trim(raw)};
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        const std::string where =
            "generator config line " + std::to_string(line_no);
        if (eq == std::string::npos) {
            throw FormatError(where + ": expected key=value");
        }
        const std::string key{trim(line.substr(0, eq))};
        const std::string value{trim(line.substr(eq + 1))};
        if (key == "n") {
            cfg.n = static_cast<std::size_t>(parse_int64(value, where));
        } else if (key == "fraud_ratio") {
            cfg.fraud_ratio = parse_double(value, where);
        } else if (key == "k_fraud") {
            cfg.k_fraud = static_cast<int>(parse_int64(value, where));
        } else if (key == "label_noise") {
            cfg.label_noise = parse_double(value, where);
        } else if (key == "seed") {
            cfg.seed = static_cast<std::uint64_t>(parse_int64(value, where));
        } else if (key == "pool_pgn") {
            cfg.pools.pgn = static_cast<std::size_t>(parse_int64(value, where));
        } else if (key == "pool_pon") {
            cfg.pools.pon = static_cast<std::size_t>(parse_int64(value, where));
        } else if (key == "pool_mgn") {
            cfg.pools.mgn = static_cast<std::size_t>(parse_int64(value, where));
        } else if (key == "pool_ssn") {
            cfg.pools.ssn = static_cast<std::size_t>(parse_int64(value, where));
        } else if (key == "blacklist_fraction") {
            cfg.blacklist_fraction = parse_double(value, where);
        } else {
            throw FormatError(where + ": unknown key '" + key + "'");
        }
    }
    cfg.validate();
    return cfg;
}

GeneratorConfig load_generator_config(const std::string& path) {
    const std::string text = read_text_file(path);
    return parse_generator_config(text);
}

} // namespace procaudit
