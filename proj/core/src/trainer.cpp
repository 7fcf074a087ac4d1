#include "procaudit/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "procaudit/errors.hpp"
#include "procaudit/math.hpp"
#include "procaudit/normalize.hpp"
#include "procaudit/rng.hpp"
#include "procaudit/textio.hpp"

namespace procaudit {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fixed4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

std::string pad_left(const std::string& s, std::size_t width) {
    if (s.size() >= width) return s;
    return std::string(width - s.size(), ' ') + s;
}

} // namespace

std::vector<std::vector<std::size_t>> partition_folds(std::size_t n,
                                                      std::size_t k,
                                                      std::uint64_t seed) {
    if (k < 2) throw ArgumentError("partition: need at least 2 folds");
    if (k > n) {
        throw ArgumentError("partition: " + std::to_string(k) +
                            " folds over " + std::to_string(n) + " rows");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    shuffle_in_place(order, rng);

    std::vector<std::vector<std::size_t>> folds(k);
    const std::size_t base = n / k;
    const std::size_t extra = n % k;
    std::size_t pos = 0;
    for (std::size_t f = 0; f < k; ++f) {
        const std::size_t len = base + (f < extra ? 1 : 0);
        folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                        order.begin() + static_cast<std::ptrdiff_t>(pos + len));
        pos += len;
    }
    return folds;
}

std::vector<std::vector<std::size_t>> stratified_partition(
    std::span<const int> labels, std::size_t k, std::uint64_t seed) {
    const std::size_t n = labels.size();
    if (k < 2) throw ArgumentError("partition: need at least 2 folds");
    if (k > n) {
        throw ArgumentError("partition: " + std::to_string(k) +
                            " folds over " + std::to_string(n) + " rows");
    }
    int max_label = 0;
    for (int l : labels) {
        if (l < 0) throw ArgumentError("partition: negative label");
        max_label = std::max(max_label, l);
    }
    std::vector<std::vector<std::size_t>> by_class(
        static_cast<std::size_t>(max_label) + 1);
    for (std::size_t i = 0; i < n; ++i) {
        by_class[static_cast<std::size_t>(labels[i])].push_back(i);
    }
    std::mt19937_64 rng(seed);
    std::vector<std::vector<std::size_t>> folds(k);
    // One cursor carried across classes keeps overall fold sizes within one
    // of each other while each class is itself dealt evenly.
    std::size_t cursor = 0;
    for (auto& rows : by_class) {
        shuffle_in_place(rows, rng);
        for (std::size_t row : rows) {
            folds[cursor].push_back(row);
            cursor = (cursor + 1) % k;
        }
    }
    return folds;
}

std::vector<double> train_epochs(const NetworkConfig& cfg,
                                 NetworkParameters& params,
                                 const Matrix& features,
                                 std::span<const int> labels,
                                 const TrainOptions& opts,
                                 std::uint64_t seed) {
    cfg.validate();
    const std::size_t n = features.rows;
    if (n == 0) throw ArgumentError("train: empty training set");
    if (labels.size() != n) {
        throw ShapeError("train: " + std::to_string(n) + " rows but " +
                         std::to_string(labels.size()) + " labels");
    }
    if (features.cols != cfg.input_dim) {
        throw ShapeError("train: features have " +
                         std::to_string(features.cols) + " columns, config " +
                         "expects " + std::to_string(cfg.input_dim));
    }
    if (opts.epochs == 0) throw ArgumentError("train: epochs must be > 0");
    if (opts.batch_size == 0) {
        throw ArgumentError("train: batch_size must be > 0");
    }
    for (int l : labels) {
        if (l < 0 || static_cast<std::size_t>(l) >= cfg.output_classes) {
            throw ArgumentError("train: label " + std::to_string(l) +
                                " out of range for " +
                                std::to_string(cfg.output_classes) +
                                " classes");
        }
    }

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Optimizer optimizer(opts.optimizer);
    Gradients grads = NetworkParameters::shaped(cfg);
    ForwardCache cache;
    std::vector<double> epoch_losses;
    epoch_losses.reserve(opts.epochs);

    for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
        shuffle_in_place(order, rng);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < n; start += opts.batch_size) {
            const std::size_t stop = std::min(n, start + opts.batch_size);
            grads.zero();
            for (std::size_t i = start; i < stop; ++i) {
                const std::size_t row = order[i];
                forward(cfg, params, features.row(row), RunMode::train, &rng,
                        cache);
                const auto target = static_cast<std::size_t>(labels[row]);
                loss_sum += cross_entropy(cache.probs, target);
                backward(cfg, params, cache, target, grads);
            }
            grads.scale(1.0 / static_cast<double>(stop - start));
            optimizer.apply(params, grads, opts.learning_rate);
        }
        epoch_losses.push_back(loss_sum / static_cast<double>(n));
    }
    return epoch_losses;
}

EvalResult evaluate(const NetworkConfig& cfg, const NetworkParameters& params,
                    const Matrix& features, std::span<const int> labels) {
    const std::size_t n = features.rows;
    if (n == 0) throw ArgumentError("evaluate: empty evaluation set");
    if (labels.size() != n) {
        throw ShapeError("evaluate: " + std::to_string(n) + " rows but " +
                         std::to_string(labels.size()) + " labels");
    }
    ForwardCache cache;
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
        forward(cfg, params, features.row(i), RunMode::infer, nullptr, cache);
        const auto target = static_cast<std::size_t>(labels[i]);
        loss_sum += cross_entropy(cache.probs, target);
        if (argmax(cache.probs) == target) ++correct;
    }
    EvalResult result;
    result.loss = loss_sum / static_cast<double>(n);
    result.accuracy = static_cast<double>(correct) / static_cast<double>(n);
    return result;
}

namespace {

// True when, for every fold, the rows outside it still contain every class.
bool training_splits_cover_all_classes(
    const std::vector<std::vector<std::size_t>>& partition,
    std::span<const int> labels, std::size_t class_count) {
    std::vector<std::size_t> total(class_count, 0);
    for (int l : labels) ++total[static_cast<std::size_t>(l)];
    std::vector<std::size_t> in_fold(class_count);
    for (const auto& fold : partition) {
        std::fill(in_fold.begin(), in_fold.end(), std::size_t{0});
        for (std::size_t view_idx : fold) {
            ++in_fold[static_cast<std::size_t>(labels[view_idx])];
        }
        for (std::size_t c = 0; c < class_count; ++c) {
            if (total[c] == in_fold[c]) return false;
        }
    }
    return true;
}

} // namespace

CrossValReport cross_validate(const Dataset& ds, TaskKind task,
                              const CrossValOptions& opts,
                              const FoldObserver& observer) {
    const LabelMode mode = task == TaskKind::binary ? LabelMode::binary
                                                    : LabelMode::multiclass;
    const bool include_clean =
        task == TaskKind::multiclass && opts.include_clean;
    const LabelView view = derive_labels(ds, mode, include_clean);
    const std::size_t n = view.row_indices.size();
    if (n == 0) throw ArgumentError("cross_validate: no labeled rows");

    auto make_partition = [&](std::uint64_t seed) {
        return opts.stratified
                   ? stratified_partition(view.labels, opts.k, seed)
                   : partition_folds(n, opts.k, seed);
    };
    const auto class_count = static_cast<std::size_t>(view.class_count);
    std::vector<std::vector<std::size_t>> partition = make_partition(opts.seed);
    for (std::size_t attempt = 0;
         !training_splits_cover_all_classes(partition, view.labels,
                                            class_count);
         ++attempt) {
        if (attempt == 5) {
            throw StratificationError(
                "cross_validate: a training split is missing a class after "
                "6 partition seeds; use stratified folds or more data");
        }
        partition = make_partition(derive_seed(opts.seed, 0xC0FFEE + attempt));
    }

    NormalizationStats shared_stats;
    if (opts.paper_faithful) shared_stats = fit(ds);

    TrainOptions topts;
    topts.epochs = opts.epochs;
    topts.batch_size = opts.batch_size;
    topts.learning_rate = opts.learning_rate;
    topts.optimizer = opts.optimizer;

    std::vector<FoldReport> folds(opts.k);
    std::vector<std::exception_ptr> failures(opts.k);

    auto run_fold = [&](std::size_t f) {
        std::vector<std::size_t> train_abs;
        std::vector<int> train_labels;
        train_abs.reserve(n - partition[f].size());
        train_labels.reserve(n - partition[f].size());
        for (std::size_t g = 0; g < opts.k; ++g) {
            if (g == f) continue;
            for (std::size_t view_idx : partition[g]) {
                train_abs.push_back(view.row_indices[view_idx]);
                train_labels.push_back(view.labels[view_idx]);
            }
        }
        std::vector<std::size_t> test_abs;
        std::vector<int> test_labels;
        test_abs.reserve(partition[f].size());
        test_labels.reserve(partition[f].size());
        for (std::size_t view_idx : partition[f]) {
            test_abs.push_back(view.row_indices[view_idx]);
            test_labels.push_back(view.labels[view_idx]);
        }

        const NormalizationStats stats =
            opts.paper_faithful ? shared_stats : fit(ds, train_abs);
        const Matrix train_x = transform(ds, train_abs, stats);
        const Matrix test_x = transform(ds, test_abs, stats);

        NetworkConfig cfg;
        cfg.input_dim = kFeatureCount;
        cfg.hidden_dim = opts.hidden_dim;
        cfg.dropout_ratio = opts.dropout_ratio;
        cfg.output_classes = static_cast<std::size_t>(view.class_count);
        cfg.seed = derive_seed(opts.seed, f + 1);

        NetworkParameters params = init(cfg);
        train_epochs(cfg, params, train_x, train_labels, topts,
                     derive_seed(cfg.seed, 2));
        const EvalResult eval = evaluate(cfg, params, test_x, test_labels);

        FoldReport& report = folds[f];
        report.fold_index = f + 1;
        report.train_size = train_abs.size();
        report.test_size = test_abs.size();
        report.loss = eval.loss;
        report.accuracy = eval.accuracy;
    };

    std::size_t jobs = opts.jobs;
    if (jobs == 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        jobs = std::max<std::size_t>(1, std::min<std::size_t>(opts.k, hw));
    }
    jobs = std::min(jobs, opts.k);

    if (jobs <= 1) {
        for (std::size_t f = 0; f < opts.k; ++f) run_fold(f);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            for (;;) {
                const std::size_t f = next.fetch_add(1);
                if (f >= opts.k) return;
                try {
                    run_fold(f);
                } catch (...) {
                    failures[f] = std::current_exception();
                }
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(jobs);
        for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
        for (const auto& failure : failures) {
            if (failure) std::rethrow_exception(failure);
        }
    }

    CrossValReport report;
    report.task = task;
    report.output_classes = static_cast<std::size_t>(view.class_count);
    report.sample_count = n;
    report.label_offset =
        (task == TaskKind::multiclass && !include_clean) ? 1 : 0;
    report.folds = std::move(folds);
    double loss_sum = 0.0;
    double acc_sum = 0.0;
    for (const FoldReport& fold : report.folds) {
        loss_sum += fold.loss;
        acc_sum += fold.accuracy;
    }
    report.average_loss = loss_sum / static_cast<double>(opts.k);
    report.average_accuracy = acc_sum / static_cast<double>(opts.k);

    if (observer) {
        std::vector<std::size_t> abs_rows;
        for (std::size_t f = 0; f < opts.k; ++f) {
            abs_rows.clear();
            for (std::size_t view_idx : partition[f]) {
                abs_rows.push_back(view.row_indices[view_idx]);
            }
            observer(f + 1, abs_rows);
        }
    }
    return report;
}

TrainedModel train_model(const Dataset& ds, TaskKind task,
                         const CrossValOptions& opts) {
    const LabelMode mode = task == TaskKind::binary ? LabelMode::binary
                                                    : LabelMode::multiclass;
    const bool include_clean =
        task == TaskKind::multiclass && opts.include_clean;
    const LabelView view = derive_labels(ds, mode, include_clean);
    if (view.row_indices.empty()) {
        throw ArgumentError("train: no labeled rows");
    }

    TrainedModel model;
    model.task = task;
    model.label_offset =
        (task == TaskKind::multiclass && !include_clean) ? 1 : 0;
    model.stats =
        opts.paper_faithful ? fit(ds) : fit(ds, view.row_indices);

    model.config.input_dim = kFeatureCount;
    model.config.hidden_dim = opts.hidden_dim;
    model.config.dropout_ratio = opts.dropout_ratio;
    model.config.output_classes =
        static_cast<std::size_t>(view.class_count);
    model.config.seed = opts.seed;

    const Matrix features = transform(ds, view.row_indices, model.stats);

    TrainOptions topts;
    topts.epochs = opts.epochs;
    topts.batch_size = opts.batch_size;
    topts.learning_rate = opts.learning_rate;
    topts.optimizer = opts.optimizer;

    model.params = init(model.config);
    train_epochs(model.config, model.params, features, view.labels, topts,
                 derive_seed(opts.seed, 2));
    return model;
}

std::string render_crossval_table(const CrossValReport& report) {
    std::ostringstream out;
    out << pad_left("Fold", 4) << "  " << pad_left("Train", 8) << "  "
        << pad_left("Test", 8) << "  " << pad_left("Loss", 10) << "  "
        << pad_left("Accuracy", 10) << '\n';
    for (const FoldReport& fold : report.folds) {
        out << pad_left(std::to_string(fold.fold_index), 4) << "  "
            << pad_left(std::to_string(fold.train_size), 8) << "  "
            << pad_left(std::to_string(fold.test_size), 8) << "  "
            << pad_left(fixed4(fold.loss), 10) << "  "
            << pad_left(fixed4(fold.accuracy), 10) << '\n';
    }
    out << pad_left("Avg", 4) << "  " << pad_left("-", 8) << "  "
        << pad_left("-", 8) << "  " << pad_left(fixed4(report.average_loss), 10)
        << "  " << pad_left(fixed4(report.average_accuracy), 10) << '\n';
    return out.str();
}

void write_crossval_jsonl(const CrossValReport& report,
                          const CrossValOptions& opts, std::ostream& out) {
    for (const FoldReport& fold : report.folds) {
        ordered_json obj;
        obj["schema"] = "procaudit.crossval.v1";
        obj["kind"] = "fold";
        obj["fold"] = fold.fold_index;
        obj["train_size"] = fold.train_size;
        obj["test_size"] = fold.test_size;
        obj["loss"] = fold.loss;
        obj["accuracy"] = fold.accuracy;
        out << obj.dump() << '\n';
    }
    ordered_json summary;
    summary["schema"] = "procaudit.crossval.v1";
    summary["kind"] = "summary";
    summary["task"] = std::string(task_name(report.task));
    summary["output_classes"] = report.output_classes;
    summary["label_offset"] = report.label_offset;
    summary["samples"] = report.sample_count;
    summary["folds"] = report.folds.size();
    summary["average_loss"] = report.average_loss;
    summary["average_accuracy"] = report.average_accuracy;
    ordered_json options;
    options["k"] = opts.k;
    options["epochs"] = opts.epochs;
    options["hidden_dim"] = opts.hidden_dim;
    options["dropout_ratio"] = opts.dropout_ratio;
    options["batch_size"] = opts.batch_size;
    options["learning_rate"] = opts.learning_rate;
    options["optimizer"] = std::string(optimizer_name(opts.optimizer));
    options["seed"] = opts.seed;
    options["paper_faithful"] = opts.paper_faithful;
    options["stratified"] = opts.stratified;
    options["include_clean"] = opts.include_clean;
    // jobs is deliberately omitted: it must not influence any output.
    summary["options"] = options;
    out << summary.dump() << '\n';
}

std::vector<Prediction> predict_rows(const TrainedModel& model,
                                     const Dataset& ds, bool has_ft) {
    std::vector<std::size_t> rows(ds.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return predict_rows(model, ds, has_ft, rows);
}

std::vector<Prediction> predict_rows(const TrainedModel& model,
                                     const Dataset& ds, bool has_ft,
                                     std::span<const std::size_t> rows) {
    std::vector<Prediction> out;
    out.reserve(rows.size());
    ForwardCache cache;
    std::array<double, kFeatureCount> normalized{};
    for (std::size_t row : rows) {
        if (row >= ds.size()) {
            throw ArgumentError("predict: row " + std::to_string(row) +
                                " out of range");
        }
        const ProcurementRecord& rec = ds.records[row];
        transform_row(rec, model.stats, normalized);
        forward(model.config, model.params, normalized, RunMode::infer,
                nullptr, cache);
        const std::size_t cls = argmax(cache.probs);
        Prediction p;
        p.row = row;
        p.psn = rec.psn;
        p.predicted = static_cast<int>(cls) + model.label_offset;
        p.confidence = cache.probs[cls];
        if (has_ft) {
            p.actual = model.task == TaskKind::binary ? (rec.ft == 0 ? 0 : 1)
                                                      : rec.ft;
        }
        out.push_back(p);
    }
    return out;
}

std::string render_prediction_table(const Dataset& ds,
                                    std::span<const Prediction> predictions,
                                    bool has_ft) {
    std::ostringstream out;
    auto fixed2 = [](double v) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.2f", v);
        return std::string(buf);
    };
    out << pad_left("Row", 6) << "  " << pad_left("PSN", 8) << "  "
        << pad_left("PGN", 4) << "  " << pad_left("PON", 4) << "  "
        << pad_left("MGN", 4) << "  " << pad_left("NP", 10) << "  "
        << pad_left("PA", 10) << "  " << pad_left("PTP", 14) << "  "
        << pad_left("SSN", 5) << "  " << pad_left("Pred", 4) << "  "
        << pad_left("Prob", 6);
    if (has_ft) out << "  " << pad_left("Actual", 6) << "  Hit";
    out << '\n';
    std::size_t hits = 0;
    for (const Prediction& p : predictions) {
        const ProcurementRecord& rec = ds.records[p.row];
        out << pad_left(std::to_string(p.row), 6) << "  "
            << pad_left(std::to_string(rec.psn), 8) << "  "
            << pad_left(std::to_string(rec.pgn), 4) << "  "
            << pad_left(std::to_string(rec.pon), 4) << "  "
            << pad_left(std::to_string(rec.mgn), 4) << "  "
            << pad_left(fixed2(rec.np), 10) << "  "
            << pad_left(fixed2(rec.pa), 10) << "  "
            << pad_left(fixed2(rec.ptp), 14) << "  "
            << pad_left(std::to_string(rec.ssn), 5) << "  "
            << pad_left(std::to_string(p.predicted), 4) << "  "
            << pad_left(fixed4(p.confidence), 6);
        if (has_ft) {
            const int actual = p.actual.value_or(0);
            const bool hit = actual == p.predicted;
            if (hit) ++hits;
            out << "  " << pad_left(std::to_string(actual), 6) << "  "
                << (hit ? "  y" : "  n");
        }
        out << '\n';
    }
    if (has_ft && !predictions.empty()) {
        out << "hit rate " << hits << '/' << predictions.size() << " = "
            << fixed4(static_cast<double>(hits) /
                      static_cast<double>(predictions.size()))
            << '\n';
    }
    return out.str();
}

void write_predictions_jsonl(std::span<const Prediction> predictions,
                             const TrainedModel& model, std::ostream& out) {
    std::size_t matched = 0;
    std::size_t with_actual = 0;
    for (const Prediction& p : predictions) {
        ordered_json obj;
        obj["schema"] = "procaudit.predict.v1";
        obj["kind"] = "prediction";
        obj["row"] = p.row;
        obj["psn"] = p.psn;
        obj["task"] = std::string(task_name(model.task));
        obj["predicted"] = p.predicted;
        obj["confidence"] = p.confidence;
        if (p.actual.has_value()) {
            obj["actual"] = *p.actual;
            ++with_actual;
            if (*p.actual == p.predicted) ++matched;
        } else {
            obj["actual"] = nullptr;
        }
        out << obj.dump() << '\n';
    }
    ordered_json summary;
    summary["schema"] = "procaudit.predict.v1";
    summary["kind"] = "summary";
    summary["task"] = std::string(task_name(model.task));
    summary["count"] = predictions.size();
    if (with_actual > 0) {
        summary["matched"] = matched;
        summary["accuracy"] =
            static_cast<double>(matched) / static_cast<double>(with_actual);
    }
    out << summary.dump() << '\n';
}

} // namespace procaudit
