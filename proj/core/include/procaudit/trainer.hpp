#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "procaudit/dataset.hpp"
#include "procaudit/model_io.hpp"
#include "procaudit/network.hpp"

namespace procaudit {

// Shuffles 0..n-1 with the seed, then cuts contiguous runs. When n % k != 0
// the first n % k folds take one extra element, so sizes differ by at most
// one. Throws ArgumentError when k < 2 or k > n.
std::vector<std::vector<std::size_t>> partition_folds(std::size_t n,
                                                      std::size_t k,
                                                      std::uint64_t seed);

// Same size guarantee, and additionally each class's rows are dealt
// round-robin across folds (with a cursor carried between classes), so
// per-class fold counts also differ by at most one.
std::vector<std::vector<std::size_t>> stratified_partition(
    std::span<const int> labels, std::size_t k, std::uint64_t seed);

struct TrainOptions {
    std::size_t epochs = 20;
    std::size_t batch_size = 128;
    double learning_rate = 0.1;
    OptimizerKind optimizer = OptimizerKind::sgd;
};

// Mini-batch training: every epoch reshuffles the row order (seeded), walks
// batches of at most batch_size, averages the batch gradients and applies
// one optimizer step per batch. Returns the mean sample loss of each epoch.
// `features` is row-per-sample, already normalized; labels are class
// indices. Throws ArgumentError on an empty set, zero epochs, zero
// batch_size, a label out of range or a row-count mismatch.
std::vector<double> train_epochs(const NetworkConfig& cfg,
                                 NetworkParameters& params,
                                 const Matrix& features,
                                 std::span<const int> labels,
                                 const TrainOptions& opts,
                                 std::uint64_t seed);

struct EvalResult {
    double loss = 0.0;
    double accuracy = 0.0;
};

// Infer-mode mean cross-entropy and argmax accuracy.
EvalResult evaluate(const NetworkConfig& cfg, const NetworkParameters& params,
                    const Matrix& features, std::span<const int> labels);

struct CrossValOptions {
    std::size_t k = 10;
    std::size_t epochs = 20;
    std::size_t hidden_dim = 512;
    double dropout_ratio = 0.2;
    std::size_t batch_size = 128;
    double learning_rate = 0.1;
    OptimizerKind optimizer = OptimizerKind::sgd;
    std::uint64_t seed = 1;
    // Fit normalization on the full dataset before splitting (the protocol
    // replicated here) instead of refitting on each fold's training rows.
    bool paper_faithful = false;
    bool stratified = false;
    // Multiclass only: keep clean records as class 0 instead of restricting
    // to fraud records with classes = fraud types.
    bool include_clean = false;
    std::size_t jobs = 0; // 0 = min(k, hardware threads)
};

struct FoldReport {
    std::size_t fold_index = 0; // 1-based, as reported
    std::size_t train_size = 0;
    std::size_t test_size = 0;
    double loss = 0.0;
    double accuracy = 0.0;
};

struct CrossValReport {
    TaskKind task = TaskKind::binary;
    std::size_t output_classes = 0;
    std::size_t sample_count = 0;
    int label_offset = 0;
    std::vector<FoldReport> folds;
    double average_loss = 0.0;
    double average_accuracy = 0.0;
};

// Called once per fold, in fold order, after all folds finish; receives the
// absolute dataset rows held out for that fold.
using FoldObserver =
    std::function<void(std::size_t fold, std::span<const std::size_t>)>;

// k-fold cross validation of the configured network over the dataset's
// labels for `task`. Each fold trains an independent model seeded from
// (opts.seed, fold), so results do not depend on `jobs`. If some training
// split misses a class the partition is re-seeded up to 5 times before
// StratificationError.
CrossValReport cross_validate(const Dataset& ds, TaskKind task,
                              const CrossValOptions& opts,
                              const FoldObserver& observer = {});

// Trains one model on the full dataset (normalization fitted on the same
// data) and packages it for persistence.
TrainedModel train_model(const Dataset& ds, TaskKind task,
                         const CrossValOptions& opts);

// Fixed-width text table: one row per fold plus an Average row, four
// decimals, matching the report layout used in write_crossval_jsonl.
std::string render_crossval_table(const CrossValReport& report);

// One JSON object per line: k fold objects then a summary object, every
// object tagged {"schema": "procaudit.crossval.v1"}.
void write_crossval_jsonl(const CrossValReport& report,
                          const CrossValOptions& opts, std::ostream& out);

struct Prediction {
    std::size_t row = 0; // 0-based row in the input CSV
    std::int64_t psn = 0;
    int predicted = 0; // class index + model.label_offset
    double confidence = 0.0;
    std::optional<int> actual; // from the FT column when present
};

// Scores every record (or the `rows` subset) with the model; `actual` is
// filled from FT when the input carried it. For binary models FT is
// collapsed to 0/1; class-excluded records (fraud-only multiclass on a
// clean record) keep actual = FT so mismatches stay visible.
std::vector<Prediction> predict_rows(const TrainedModel& model,
                                     const Dataset& ds, bool has_ft);
std::vector<Prediction> predict_rows(const TrainedModel& model,
                                     const Dataset& ds, bool has_ft,
                                     std::span<const std::size_t> rows);

// One row per prediction showing the record's inputs, the predicted label
// and its probability, plus actual label and hit flag when FT was present;
// ends with a summary hit-rate line in that case.
std::string render_prediction_table(const Dataset& ds,
                                    std::span<const Prediction> predictions,
                                    bool has_ft);

// {"schema": "procaudit.predict.v1"} objects, one per prediction.
void write_predictions_jsonl(std::span<const Prediction> predictions,
                             const TrainedModel& model, std::ostream& out);

} // namespace procaudit
