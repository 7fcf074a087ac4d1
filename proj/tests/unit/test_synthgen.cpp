#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>
#include <sstream>

#include "procaudit/dataset.hpp"
#include "procaudit/errors.hpp"
#include "procaudit/synthgen.hpp"

using namespace procaudit;

// Independent re-statement of the five rules, kept free of archetype_of so
// the two implementations check each other.
static int count_rule_matches(const ProcurementRecord& r,
                              const ArchetypeRules& rules) {
    int matches = 0;
    if (r.ssn >= rules.ssn_blacklist_start) ++matches;
    if (r.np > rules.np_ratio_threshold * price_base(r.mgn)) ++matches;
    if (r.pa > rules.pa_threshold) ++matches;
    const double expected = r.np * r.pa;
    if (expected > 0.0 &&
        std::abs(r.ptp / expected - 1.0) > rules.ptp_rel_threshold)
        ++matches;
    if (r.pgn >= rules.pgn_offender_start) ++matches;
    return matches;
}

TEST_CASE("default id ranges leave a margin between safe and flagged") {
    const GeneratorConfig cfg;
    const ArchetypeRules rules = rules_for(cfg);
    // 400 suppliers, top 15% blacklisted.
    CHECK(rules.ssn_blacklist_start == 341);
    // 40 groups, top eighth repeat offenders.
    CHECK(rules.pgn_offender_start == 36);
    CHECK(rules.np_ratio_threshold == 2.0);
    CHECK(rules.pa_threshold == 10000.0);
    CHECK(rules.ptp_rel_threshold == 0.1);
}

TEST_CASE("price base is a fixed exponential curve") {
    CHECK(price_base(0) == 20.0);
    CHECK(price_base(10) == doctest::Approx(20.0 * std::exp(0.55)));
    CHECK(price_base(5) > price_base(4));
}

TEST_CASE("config validation rejects out-of-range fields") {
    const auto invalid = [](auto&& mutate) {
        GeneratorConfig cfg;
        cfg.n = 1000;
        mutate(cfg);
        return cfg;
    };
    CHECK_THROWS_AS(invalid([](GeneratorConfig& c) { c.n = 0; }).validate(),
                    ArgumentError);
    CHECK_THROWS_AS(
        invalid([](GeneratorConfig& c) { c.fraud_ratio = 0.0; }).validate(),
        ArgumentError);
    CHECK_THROWS_AS(
        invalid([](GeneratorConfig& c) { c.fraud_ratio = 1.0; }).validate(),
        ArgumentError);
    CHECK_THROWS_AS(
        invalid([](GeneratorConfig& c) { c.k_fraud = 1; }).validate(),
        ArgumentError);
    CHECK_THROWS_AS(
        invalid([](GeneratorConfig& c) { c.k_fraud = 6; }).validate(),
        ArgumentError);
    CHECK_THROWS_AS(
        invalid([](GeneratorConfig& c) { c.label_noise = 0.5; }).validate(),
        ArgumentError);
    CHECK_THROWS_AS(
        invalid([](GeneratorConfig& c) { c.label_noise = -0.01; }).validate(),
        ArgumentError);
    CHECK_THROWS_AS(
        invalid([](GeneratorConfig& c) { c.blacklist_fraction = 0.0; })
            .validate(),
        ArgumentError);
    CHECK_THROWS_AS(
        invalid([](GeneratorConfig& c) { c.pools.ssn = 2; }).validate(),
        ArgumentError);
    CHECK_THROWS_AS(
        invalid([](GeneratorConfig& c) { c.pools.pon = 0; }).validate(),
        ArgumentError);
    // Rounds to zero planted frauds.
    CHECK_THROWS_AS(invalid([](GeneratorConfig& c) {
                        c.n = 10;
                        c.fraud_ratio = 0.01;
                    }).validate(),
                    ArgumentError);
    CHECK_NOTHROW(GeneratorConfig{}.validate());
}

TEST_CASE("the planted fraud count is exact") {
    GeneratorConfig cfg;
    cfg.n = 1000;
    cfg.fraud_ratio = 0.3;
    cfg.seed = 4;
    const Dataset ds = generate(cfg);
    CHECK(ds.size() == 1000);
    CHECK(ds.count_fraud() == 300);

    cfg.fraud_ratio = 0.5;
    CHECK(generate(cfg).count_fraud() == 500);
}

TEST_CASE("serial numbers are sequential from 100000") {
    GeneratorConfig cfg;
    cfg.n = 50;
    cfg.seed = 9;
    const Dataset ds = generate(cfg);
    for (std::size_t i = 0; i < ds.size(); ++i)
        CHECK(ds.records[i].psn == 100000 + static_cast<std::int64_t>(i));
}

TEST_CASE("ids stay inside their pools and prices stay positive") {
    GeneratorConfig cfg;
    cfg.n = 2000;
    cfg.seed = 31;
    const Dataset ds = generate(cfg);
    for (const ProcurementRecord& r : ds.records) {
        CHECK(r.pgn >= 1);
        CHECK(r.pgn <= 40);
        CHECK(r.pon >= 1);
        CHECK(r.pon <= 12);
        CHECK(r.mgn >= 1);
        CHECK(r.mgn <= 25);
        CHECK(r.ssn >= 1);
        CHECK(r.ssn <= 400);
        CHECK(r.np > 0.0);
        CHECK(r.pa > 0.0);
        CHECK(r.ptp > 0.0);
        CHECK(r.ft >= 0);
        CHECK(r.ft <= 5);
    }
}

TEST_CASE("noiseless labels are exactly recoverable from the features") {
    for (const std::uint64_t seed : {1ULL, 99ULL, 12345ULL}) {
        GeneratorConfig cfg;
        cfg.n = 2000;
        cfg.seed = seed;
        const Dataset ds = generate(cfg);
        const ArchetypeRules rules = rules_for(cfg);

        std::set<int> types_seen;
        for (const ProcurementRecord& r : ds.records) {
            CHECK(archetype_of(r, rules) == r.ft);
            // Fraud records satisfy exactly their own rule; clean ones none.
            CHECK(count_rule_matches(r, rules) == (r.ft != 0 ? 1 : 0));
            types_seen.insert(r.ft);
        }
        CHECK(types_seen ==
              std::set<int>{0, 1, 2, 3, 4, 5}); // every archetype planted
    }
}

TEST_CASE("smaller k_fraud restricts the planted types") {
    GeneratorConfig cfg;
    cfg.n = 1000;
    cfg.k_fraud = 3;
    cfg.seed = 8;
    const Dataset ds = generate(cfg);
    for (const ProcurementRecord& r : ds.records) CHECK(r.ft <= 3);
    CHECK(ds.max_fraud_type() == 3);
}

TEST_CASE("label noise flips across the binary boundary only") {
    GeneratorConfig cfg;
    cfg.n = 5000;
    cfg.label_noise = 0.2;
    cfg.seed = 7;
    const Dataset ds = generate(cfg);
    const ArchetypeRules rules = rules_for(cfg);

    std::size_t flipped = 0;
    for (const ProcurementRecord& r : ds.records) {
        const int truth = archetype_of(r, rules);
        if (r.ft != truth) {
            ++flipped;
            // A noisy fraud label only ever lands on a clean record and
            // vice versa; fraud records never swap fraud types.
            CHECK((truth == 0) != (r.ft == 0));
        }
        CHECK(r.ft >= 0);
        CHECK(r.ft <= cfg.k_fraud);
    }
    // Binomial(5000, 0.2): five-sigma band.
    CHECK(flipped > 850);
    CHECK(flipped < 1150);
}

TEST_CASE("bayes ceiling formulas") {
    GeneratorConfig cfg;
    cfg.n = 1000;

    cfg.label_noise = 0.0;
    CHECK(bayes_accuracy(cfg, LabelMode::binary) == 1.0);
    CHECK(bayes_accuracy(cfg, LabelMode::multiclass) == 1.0);

    cfg.label_noise = 0.1;
    CHECK(bayes_accuracy(cfg, LabelMode::binary) == doctest::Approx(0.9));

    cfg.label_noise = 0.02;
    cfg.fraud_ratio = 0.5;
    cfg.k_fraud = 5;
    // (r(1-e) + (1-r)e/k) / (r(1-e) + (1-r)e) at r=.5, e=.02, k=5.
    CHECK(bayes_accuracy(cfg, LabelMode::multiclass) ==
          doctest::Approx(0.984).epsilon(1e-12));

    // The binary ceiling does not depend on the class mix.
    cfg.fraud_ratio = 0.2;
    cfg.label_noise = 0.3;
    CHECK(bayes_accuracy(cfg, LabelMode::binary) == doctest::Approx(0.7));
}

TEST_CASE("generation is a pure function of the config") {
    GeneratorConfig cfg;
    cfg.n = 500;
    cfg.label_noise = 0.05;
    cfg.seed = 101;

    const auto bytes = [](const Dataset& ds) {
        std::ostringstream out;
        write_csv(ds, out);
        return out.str();
    };
    CHECK(bytes(generate(cfg)) == bytes(generate(cfg)));

    GeneratorConfig other = cfg;
    other.seed = 102;
    CHECK(bytes(generate(other)) != bytes(generate(cfg)));
}

TEST_CASE("config files parse with comments, defaults and overrides") {
    const std::string text =
        "# generator settings\n"
        "\n"
        "n = 1234\n"
        "fraud_ratio = 0.4\n"
        "k_fraud = 4\n"
        "label_noise = 0.05\n"
        "seed = 42\n"
        "pool_pgn = 80\n"
        "pool_pon = 6\n"
        "pool_mgn = 30\n"
        "pool_ssn = 500\n"
        "blacklist_fraction = 0.2\n";
    const GeneratorConfig cfg = parse_generator_config(text);
    CHECK(cfg.n == 1234);
    CHECK(cfg.fraud_ratio == 0.4);
    CHECK(cfg.k_fraud == 4);
    CHECK(cfg.label_noise == 0.05);
    CHECK(cfg.seed == 42);
    CHECK(cfg.pools.pgn == 80);
    CHECK(cfg.pools.pon == 6);
    CHECK(cfg.pools.mgn == 30);
    CHECK(cfg.pools.ssn == 500);
    CHECK(cfg.blacklist_fraction == 0.2);

    // Missing keys keep their defaults.
    const GeneratorConfig sparse = parse_generator_config("n = 77\n");
    CHECK(sparse.n == 77);
    CHECK(sparse.fraud_ratio == 0.5);
    CHECK(sparse.k_fraud == 5);
    CHECK(sparse.pools.ssn == 400);

    const GeneratorConfig empty = parse_generator_config("");
    CHECK(empty.n == 50000);
}

TEST_CASE("config files reject unknown keys and bad values") {
    CHECK_THROWS_WITH_AS(parse_generator_config("rows = 10\n"),
                         doctest::Contains("rows"), FormatError);
    CHECK_THROWS_AS(parse_generator_config("n = ten\n"), ParseError);
    CHECK_THROWS_AS(parse_generator_config("fraud_ratio = 0.5.5\n"),
                    ParseError);
    CHECK_THROWS_AS(parse_generator_config("n\n"), FormatError);
}

TEST_CASE("config file loading reports io failures") {
    CHECK_THROWS_AS(load_generator_config("/nonexistent-dir/gen.conf"),
                    IoError);
}
