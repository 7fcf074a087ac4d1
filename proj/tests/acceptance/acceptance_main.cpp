// Release gate: every shipped claim about the pipeline, checked end to end.
// Each criterion prints exactly one PASS/FAIL line; the process exits 0 only
// when all of them hold. Slow criteria drive the installed CLI binary the
// same way a user would.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "json.hpp"
#include "procaudit/dataset.hpp"
#include "procaudit/gradcheck.hpp"
#include "procaudit/math.hpp"
#include "procaudit/network.hpp"
#include "procaudit/normalize.hpp"
#include "procaudit/rng.hpp"
#include "procaudit/synthgen.hpp"
#include "procaudit/textio.hpp"
#include "procaudit/trainer.hpp"

namespace fs = std::filesystem;
using namespace procaudit;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return std::string(buf);
}

const fs::path& work_dir() {
    static const fs::path dir = [] {
        const fs::path d = fs::temp_directory_path() /
                           ("procaudit_acceptance_" +
                            std::to_string(::getpid()));
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

// Runs the CLI binary, discarding its console output. Returns the exit code.
int run_cli(const std::string& args) {
    static int counter = 0;
    const fs::path sink =
        work_dir() / ("cli_out_" + std::to_string(counter++) + ".txt");
    const std::string cmd = std::string(PROCAUDIT_CLI_PATH) + " " + args +
                            " > " + sink.string() + " 2>&1";
    const int raw = std::system(cmd.c_str());
    if (raw == -1 || !WIFEXITED(raw)) return -1;
    return WEXITSTATUS(raw);
}

double summary_average_accuracy(const fs::path& report) {
    const std::string text = read_text_file(report.string());
    std::istringstream in(text);
    std::string line, last;
    while (std::getline(in, line))
        if (!line.empty()) last = line;
    const nlohmann::json summary = nlohmann::json::parse(last);
    return summary.at("average_accuracy").get<double>();
}

// ---------------------------------------------------------------------------
// 1. Hand-derived gradients against the central-difference oracle.

Outcome gradient_oracle() {
    const double step = 1e-3;
    const std::size_t hidden_choices[] = {4, 8, 16};
    const std::size_t class_choices[] = {2, 5};

    std::mt19937_64 rng(2024);
    double worst = 0.0;
    int accepted = 0;
    int attempts = 0;
    while (accepted < 50) {
        if (++attempts > 2000)
            return {false, "could not find 50 kink-free configurations"};

        NetworkConfig cfg;
        cfg.input_dim = 8;
        cfg.hidden_dim = hidden_choices[bounded_u64(rng, 3)];
        cfg.output_classes = class_choices[bounded_u64(rng, 2)];
        cfg.dropout_ratio = 0.0;
        cfg.seed = rng();

        const NetworkParameters params = init(cfg);
        Vector x(cfg.input_dim);
        for (double& v : x) v = uniform_in(rng, 0.1, 0.9);
        const std::size_t target = bounded_u64(rng, cfg.output_classes);

        // Finite differences step across relu kinks when a pre-activation
        // sits within the probe's reach, so such draws are re-rolled.
        ForwardCache cache;
        forward(cfg, params, x, RunMode::train, nullptr, cache);
        double closest = 1e300;
        for (double z : cache.z1) closest = std::min(closest, std::abs(z));
        for (double z : cache.z2) closest = std::min(closest, std::abs(z));
        if (closest < 5e-3) continue;
        ++accepted;

        Gradients grads = NetworkParameters::shaped(cfg);
        grads.zero();
        backward(cfg, params, cache, target, grads);
        const std::vector<double> analytic = to_flat(grads);

        const auto loss = [&](std::span<const double> flat) {
            NetworkParameters q = NetworkParameters::shaped(cfg);
            from_flat(flat, q);
            ForwardCache c;
            forward(cfg, q, x, RunMode::train, nullptr, c);
            return cross_entropy(c.probs, target);
        };
        const std::vector<double> numeric =
            numerical_gradient(loss, to_flat(params), step);

        double diff = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < analytic.size(); ++i) {
            diff = std::max(diff, std::abs(analytic[i] - numeric[i]));
            scale = std::max({scale, std::abs(analytic[i]),
                              std::abs(numeric[i])});
        }
        worst = std::max(worst, diff / scale);
    }

    return {worst <= 1e-4,
            fmt("50 configurations, max relative error %.2e", worst)};
}

// ---------------------------------------------------------------------------
// 2. Normalization contract on random data.

Outcome normalization_contract() {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t rows = 2 + bounded_u64(rng, 49);
        Dataset ds;
        ds.records.resize(rows);

        std::array<bool, kFeatureCount> degenerate{};
        std::array<double, kFeatureCount> constant{};
        for (std::size_t c = 0; c < kFeatureCount; ++c) {
            degenerate[c] = unit_uniform(rng) < 0.3;
            constant[c] = uniform_in(rng, -1e5, 1e5);
        }

        for (ProcurementRecord& r : ds.records) {
            std::array<double, kFeatureCount> v{};
            for (std::size_t c = 0; c < kFeatureCount; ++c)
                v[c] = degenerate[c] ? constant[c]
                                     : uniform_in(rng, -1e5, 1e5);
            r.psn = static_cast<std::int64_t>(v[0]);
            r.pgn = static_cast<std::int64_t>(v[1]);
            r.pon = static_cast<std::int64_t>(v[2]);
            r.mgn = static_cast<std::int64_t>(v[3]);
            r.np = v[4];
            r.pa = v[5];
            r.ptp = v[6];
            r.ssn = static_cast<std::int64_t>(v[7]);
        }

        const NormalizationStats stats = fit(ds);
        const Matrix raw = ds.feature_matrix();
        const Matrix scaled = transform(ds, stats);
        for (std::size_t i = 0; i < scaled.rows; ++i) {
            for (std::size_t c = 0; c < kFeatureCount; ++c) {
                const double cell = scaled(i, c);
                if (cell < 0.0 || cell > 1.0)
                    return {false, fmt("trial %d: cell %.17g outside [0,1]",
                                       trial, cell)};
                if (stats.min[c] == stats.max[c]) {
                    if (cell != 0.0)
                        return {false,
                                fmt("trial %d: degenerate column %zu gave "
                                    "%.17g, want exactly 0",
                                    trial, c, cell)};
                    continue;
                }
                const double orig = raw(i, c);
                const double back =
                    denormalize_cell(cell, stats.min[c], stats.max[c]);
                if (std::abs(back - orig) >
                    1e-9 * std::max(1.0, std::abs(orig)))
                    return {false,
                            fmt("trial %d: inverse drifted %.3e at %.17g",
                                trial, std::abs(back - orig), orig)};
            }
        }
    }
    return {true, "1000 random datasets: cells in [0,1], degenerate columns "
                  "0.0, inverse within 1e-9"};
}

// ---------------------------------------------------------------------------
// 3. Fold partition properties.

Outcome partition_properties() {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t k = 2 + bounded_u64(rng, 19);   // [2, 20]
        const std::size_t n = 20 + bounded_u64(rng, 4981); // [20, 5000]
        const std::uint64_t seed = rng();

        const auto folds = partition_folds(n, k, seed);
        if (folds.size() != k)
            return {false, fmt("trial %d: %zu folds, want %zu", trial,
                               folds.size(), k)};

        std::set<std::size_t> seen;
        std::size_t largest = 0, smallest = n;
        for (const auto& fold : folds) {
            largest = std::max(largest, fold.size());
            smallest = std::min(smallest, fold.size());
            for (std::size_t idx : fold) {
                if (idx >= n || !seen.insert(idx).second)
                    return {false,
                            fmt("trial %d: duplicate or out-of-range row",
                                trial)};
            }
        }
        if (seen.size() != n)
            return {false, fmt("trial %d: not exhaustive", trial)};
        if (largest - smallest > 1)
            return {false, fmt("trial %d: size spread %zu", trial,
                               largest - smallest)};
        if (partition_folds(n, k, seed) != folds)
            return {false, fmt("trial %d: not deterministic", trial)};
    }
    return {true, "200 random (n, k, seed): disjoint, exhaustive, "
                  "spread <= 1, deterministic"};
}

// ---------------------------------------------------------------------------
// 4. Overfit sanity on a small noiseless set.

Outcome overfit_sanity() {
    GeneratorConfig gen;
    gen.n = 200;
    gen.seed = 5;
    const Dataset ds = generate(gen);

    CrossValOptions opts;
    opts.epochs = 500;
    opts.hidden_dim = 32;
    opts.dropout_ratio = 0.0; // memorization run, no regularization
    opts.batch_size = 16;
    opts.learning_rate = 0.1;
    opts.seed = 5;

    const TrainedModel model = train_model(ds, TaskKind::binary, opts);
    const LabelView view = derive_labels(ds, LabelMode::binary);
    const Matrix features = transform(ds, model.stats);
    const EvalResult eval =
        evaluate(model.config, model.params, features, view.labels);

    return {eval.accuracy >= 0.99,
            fmt("200 rows, hidden 32, 500 epochs: training accuracy %.4f",
                eval.accuracy)};
}

// ---------------------------------------------------------------------------
// 5 and 6. Cross-validation analogs with known noise ceilings.

Outcome binary_crossval_analog() {
    const fs::path data = work_dir() / "binary_10k.csv";
    const fs::path report = work_dir() / "binary_10k.jsonl";
    if (run_cli("generate --out " + data.string() +
                " --n 10000 --noise 0.1 --seed 777") != 0)
        return {false, "generate failed"};
    if (run_cli("crossval --data " + data.string() +
                " --task binary --k 10 --epochs 20 --hidden 128 --seed 777"
                " --report " + report.string()) != 0)
        return {false, "crossval failed"};

    const double acc = summary_average_accuracy(report);
    return {acc >= 0.85 && acc <= 0.905,
            fmt("n=10000, noise 0.10: average accuracy %.4f, band "
                "[0.85, 0.905], ceiling 0.90",
                acc)};
}

Outcome multiclass_crossval_analog() {
    const fs::path data = work_dir() / "multiclass_10k.csv";
    const fs::path report = work_dir() / "multiclass_10k.jsonl";
    if (run_cli("generate --out " + data.string() +
                " --n 10000 --noise 0.02 --seed 42") != 0)
        return {false, "generate failed"};
    if (run_cli("crossval --data " + data.string() +
                " --task multiclass --k 10 --epochs 20 --hidden 128 --seed 42"
                " --report " + report.string()) != 0)
        return {false, "crossval failed"};

    const double acc = summary_average_accuracy(report);
    return {acc >= 0.95 && acc <= 0.985,
            fmt("fraud subset, noise 0.02: average accuracy %.4f, band "
                "[0.95, 0.985]",
                acc)};
}

// ---------------------------------------------------------------------------
// 7. Labels are recoverable from the features when noise is off.

Outcome rule_replay() {
    for (const std::uint64_t seed : {9ULL, 123ULL}) {
        GeneratorConfig gen;
        gen.n = 500;
        gen.seed = seed;
        const Dataset ds = generate(gen);
        const ArchetypeRules rules = rules_for(gen);
        for (const ProcurementRecord& r : ds.records) {
            if (archetype_of(r, rules) != r.ft)
                return {false,
                        fmt("seed %llu: psn %lld labeled %d, rules say %d",
                            static_cast<unsigned long long>(seed),
                            static_cast<long long>(r.psn), r.ft,
                            archetype_of(r, rules))};
        }
    }
    return {true, "rule replay recovers every label: 500/500 on both seeds, "
                  "accuracy exactly 1.0"};
}

// ---------------------------------------------------------------------------
// 8. End-to-end determinism, including parallel folds.

Outcome determinism() {
    const std::string gen_args = " --n 2000 --noise 0.05 --seed 555";
    const fs::path csv_a = work_dir() / "det_a.csv";
    const fs::path csv_b = work_dir() / "det_b.csv";
    if (run_cli("generate --out " + csv_a.string() + gen_args) != 0 ||
        run_cli("generate --out " + csv_b.string() + gen_args) != 0)
        return {false, "generate failed"};
    if (read_text_file(csv_a.string()) != read_text_file(csv_b.string()))
        return {false, "two generate runs with one seed differ"};

    const std::string cv_args = "crossval --data " + csv_a.string() +
                                " --task binary --k 10 --epochs 5 --hidden 32"
                                " --seed 555 --report ";
    const fs::path rep_serial1 = work_dir() / "det_serial1.jsonl";
    const fs::path rep_serial2 = work_dir() / "det_serial2.jsonl";
    const fs::path rep_parallel = work_dir() / "det_parallel.jsonl";
    if (run_cli(cv_args + rep_serial1.string() + " --jobs 1") != 0 ||
        run_cli(cv_args + rep_serial2.string() + " --jobs 1") != 0 ||
        run_cli(cv_args + rep_parallel.string() + " --jobs 4") != 0)
        return {false, "crossval failed"};

    const std::string serial = read_text_file(rep_serial1.string());
    if (serial != read_text_file(rep_serial2.string()))
        return {false, "two serial crossval runs with one seed differ"};
    if (serial != read_text_file(rep_parallel.string()))
        return {false, "serial and 4-way parallel reports differ"};
    return {true, "CSV and JSONL byte-identical across reruns; "
                  "serial == parallel"};
}

// ---------------------------------------------------------------------------
// 9. Inverted dropout keeps the expected activation unchanged.

Outcome dropout_scaling() {
    NetworkConfig cfg;
    cfg.input_dim = 8;
    cfg.hidden_dim = 64;
    cfg.dropout_ratio = 0.2;
    cfg.output_classes = 2;
    cfg.seed = 3;
    const NetworkParameters params = init(cfg);

    std::mt19937_64 input_rng(17);
    Vector x(cfg.input_dim);
    for (double& v : x) v = uniform_in(input_rng, 0.1, 0.9);

    ForwardCache cache;
    forward(cfg, params, x, RunMode::infer, nullptr, cache);
    const Vector reference = cache.h1;

    const std::size_t draws = 100000;
    Vector mean(cfg.hidden_dim, 0.0);
    std::mt19937_64 rng(91);
    for (std::size_t i = 0; i < draws; ++i) {
        forward(cfg, params, x, RunMode::train, &rng, cache);
        for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += cache.h1[j];
    }
    for (double& m : mean) m /= static_cast<double>(draws);

    double worst = 0.0;
    for (std::size_t j = 0; j < mean.size(); ++j) {
        if (reference[j] == 0.0) {
            // A unit relu keeps at zero must stay at zero under dropout.
            if (mean[j] != 0.0)
                return {false, fmt("dead unit %zu woke up: %.3e", j, mean[j])};
            continue;
        }
        worst = std::max(worst,
                         std::abs(mean[j] - reference[j]) / reference[j]);
    }
    return {worst <= 0.01,
            fmt("1e5 train draws: worst unit mean off by %.4f%%, budget 1%%",
                worst * 100.0)};
}

// ---------------------------------------------------------------------------
// 10. Report totals are the arithmetic fold means.

Outcome report_structure() {
    GeneratorConfig gen;
    gen.n = 300;
    gen.label_noise = 0.05;
    gen.seed = 12;
    const Dataset ds = generate(gen);

    CrossValOptions opts;
    opts.k = 10;
    opts.epochs = 2;
    opts.hidden_dim = 8;
    opts.batch_size = 32;
    opts.seed = 12;
    const CrossValReport report = cross_validate(ds, TaskKind::binary, opts);

    if (report.folds.size() != opts.k)
        return {false, fmt("%zu fold rows, want %zu", report.folds.size(),
                           opts.k)};

    double loss_sum = 0.0, acc_sum = 0.0;
    for (const FoldReport& fold : report.folds) {
        loss_sum += fold.loss;
        acc_sum += fold.accuracy;
    }
    const double loss_err =
        std::abs(report.average_loss - loss_sum / static_cast<double>(opts.k));
    const double acc_err = std::abs(report.average_accuracy -
                                    acc_sum / static_cast<double>(opts.k));
    if (loss_err > 1e-12 || acc_err > 1e-12)
        return {false, fmt("average drifts from fold means: loss %.3e, "
                           "accuracy %.3e",
                           loss_err, acc_err)};

    // The rendered table carries the same shape: header, k folds, average.
    const std::string table = render_crossval_table(report);
    const std::size_t lines = static_cast<std::size_t>(
        std::count(table.begin(), table.end(), '\n'));
    if (lines != opts.k + 2 || table.find("Avg") == std::string::npos)
        return {false, "rendered table shape is wrong"};

    return {true, fmt("10 fold rows; averages match fold means within 1e-12 "
                      "(loss err %.1e, accuracy err %.1e)",
                      loss_err, acc_err)};
}

struct Criterion {
    const char* name;
    Outcome (*run)();
    double budget_seconds; // 0 = no budget
};

} // namespace

int main() {
    const Criterion criteria[] = {
        {"gradient oracle", gradient_oracle, 30.0},
        {"normalization contract", normalization_contract, 0.0},
        {"fold partition properties", partition_properties, 0.0},
        {"overfit sanity", overfit_sanity, 60.0},
        {"binary crossval analog", binary_crossval_analog, 600.0},
        {"multiclass crossval analog", multiclass_crossval_analog, 300.0},
        {"rule-replay oracle", rule_replay, 0.0},
        {"determinism", determinism, 0.0},
        {"dropout scaling", dropout_scaling, 0.0},
        {"report structure", report_structure, 0.0},
    };

    int passed = 0;
    int index = 0;
    for (const Criterion& criterion : criteria) {
        ++index;
        const auto started = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = criterion.run();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          started)
                .count();
        if (outcome.pass && criterion.budget_seconds > 0.0 &&
            elapsed > criterion.budget_seconds) {
            outcome.pass = false;
            outcome.detail += fmt(" [over %.0f s budget]",
                                  criterion.budget_seconds);
        }
        if (outcome.pass) ++passed;
        std::printf("criterion %2d %s  %s: %s (%.1f s)\n", index,
                    outcome.pass ? "PASS" : "FAIL", criterion.name,
                    outcome.detail.c_str(), elapsed);
        std::fflush(stdout);
    }

    std::printf("acceptance: %d/10 criteria passed\n", passed);
    return passed == 10 ? 0 : 1;
}
