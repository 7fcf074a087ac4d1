#pragma once

#include <cstdint>
#include <string>

#include "procaudit/dataset.hpp"

namespace procaudit {

struct PoolSizes {
    std::size_t pgn = 40;  // purchasing groups
    std::size_t pon = 12;  // purchasing organizations
    std::size_t mgn = 25;  // material groups
    std::size_t ssn = 400; // suppliers
};

struct GeneratorConfig {
    std::size_t n = 50000;
    double fraud_ratio = 0.5; // exact planted count = round(n * fraud_ratio)
    int k_fraud = 5;          // fraud types 1..k_fraud, in [2, 5]
    double label_noise = 0.0; // in [0, 0.5): see generate()
    std::uint64_t seed = 1;
    PoolSizes pools;
    double blacklist_fraction = 0.15; // top slice of the supplier pool

    // Throws ArgumentError when any field is out of range or the pools are
    // too small to leave a margin between clean and flagged id ranges.
    void validate() const;
};

// Feature-level definition of each fraud type. Every threshold is decidable
// from the eight features alone, and planted records satisfy exactly one
// rule, so the labels are recoverable from the features when label_noise
// is 0:
//   1: supplier in the blacklisted id range
//   2: net price above np_ratio times the material-group base price
//   3: purchased amount above pa_threshold
//   4: total paid off by more than ptp_rel_threshold from np * pa
//   5: purchasing group in the repeat-offender id range
struct ArchetypeRules {
    std::int64_t ssn_blacklist_start = 0;
    std::int64_t pgn_offender_start = 0;
    double np_ratio_threshold = 2.0;
    double pa_threshold = 10000.0;
    double ptp_rel_threshold = 0.1;
};

ArchetypeRules rules_for(const GeneratorConfig& cfg);

// Deterministic per-material-group base price, shared by the generator and
// the type-2 rule.
double price_base(std::int64_t mgn);

// First matching rule (1..5), or 0 when none applies.
int archetype_of(const ProcurementRecord& r, const ArchetypeRules& rules);

// Builds n records with round(n * fraud_ratio) frauds planted at seeded
// random positions; each fraud's type is uniform over 1..k_fraud and its
// features are drawn to satisfy exactly that type's rule. With probability
// label_noise a record's FT is then replaced by a label from the other
// binary class (clean -> uniform fraud type, fraud -> 0); features are left
// alone, so noisy labels contradict the rules. Fully determined by cfg.
Dataset generate(const GeneratorConfig& cfg);

// Best achievable accuracy of any classifier reading only the features.
// Binary: 1 - label_noise (noise always crosses the class boundary).
// Multiclass (fraud-labelled rows only): flipped clean records carry labels
// independent of their features, so with r = fraud_ratio and e = noise,
//   [r(1-e) + (1-r)e/k] / [r(1-e) + (1-r)e].
double bayes_accuracy(const GeneratorConfig& cfg, LabelMode mode);

// key=value file, '#' comments and blank lines allowed. Keys: n,
// fraud_ratio, k_fraud, label_noise, seed, pool_pgn, pool_pon, pool_mgn,
// pool_ssn, blacklist_fraction. Unknown keys are FormatError; values go
// through the usual numeric parsers. Missing keys keep their defaults.
GeneratorConfig parse_generator_config(const std::string& text);
GeneratorConfig load_generator_config(const std::string& path);

} // namespace procaudit
