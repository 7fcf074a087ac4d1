#include <cstdint>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "procaudit/dataset.hpp"
#include "procaudit/errors.hpp"
#include "procaudit/model_io.hpp"
#include "procaudit/normalize.hpp"
#include "procaudit/rng.hpp"
#include "procaudit/synthgen.hpp"
#include "procaudit/textio.hpp"
#include "procaudit/trainer.hpp"

namespace {

using namespace procaudit;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct GenerateArgs {
    std::string out_path;
    std::string config_path;
    std::size_t n = 0;
    double fraud_ratio = 0.0;
    int k_fraud = 0;
    double noise = 0.0;
    std::uint64_t seed = 0;
};

struct TrainArgs {
    std::string data_path;
    std::string task = "binary";
    std::string out_path;
    CrossValOptions opts;
};

struct CrossvalArgs {
    std::string data_path;
    std::string task = "binary";
    std::string report_path;
    CrossValOptions opts;
};

struct PredictArgs {
    std::string model_path;
    std::string data_path;
    std::string out_path;
    std::size_t sample = 0;
    std::uint64_t seed = 1;
};

struct InspectArgs {
    std::string data_path;
    std::string config_path;
};

void add_train_flags(CLI::App* cmd, CrossValOptions& opts) {
    cmd->add_option("--epochs", opts.epochs, "training epochs")
        ->capture_default_str();
    cmd->add_option("--hidden", opts.hidden_dim, "hidden layer width")
        ->capture_default_str();
    cmd->add_option("--dropout", opts.dropout_ratio, "dropout ratio in [0,1)")
        ->capture_default_str();
    cmd->add_option("--batch", opts.batch_size, "mini-batch size")
        ->capture_default_str();
    cmd->add_option("--lr", opts.learning_rate, "learning rate")
        ->capture_default_str();
    cmd->add_option_function<std::string>(
           "--optimizer",
           [&opts](const std::string& name) {
               opts.optimizer = parse_optimizer(name);
           },
           "sgd or rmsprop")
        ->default_str("sgd");
    cmd->add_option("--seed", opts.seed, "master random seed")
        ->envname("PROCAUDIT_SEED")
        ->capture_default_str();
    cmd->add_flag("--paper-faithful", opts.paper_faithful,
                  "fit normalization on the whole dataset instead of "
                  "per-fold training rows");
    cmd->add_flag("--include-clean", opts.include_clean,
                  "multiclass: keep clean rows as class 0");
}

int run_generate(const GenerateArgs& args, const CLI::App* cmd) {
    GeneratorConfig cfg;
    if (!args.config_path.empty()) {
        cfg = load_generator_config(args.config_path);
    }
    if (cmd->count("--n") != 0) cfg.n = args.n;
    if (cmd->count("--fraud-ratio") != 0) cfg.fraud_ratio = args.fraud_ratio;
    if (cmd->count("--k-fraud") != 0) cfg.k_fraud = args.k_fraud;
    if (cmd->count("--noise") != 0) cfg.label_noise = args.noise;
    if (cmd->count("--seed") != 0) cfg.seed = args.seed;
    cfg.validate();

    const Dataset ds = generate(cfg);
    write_csv_file(ds, args.out_path);

    std::vector<std::size_t> per_type(
        static_cast<std::size_t>(ds.max_fraud_type()) + 1, 0);
    for (const ProcurementRecord& rec : ds.records) {
        ++per_type[static_cast<std::size_t>(rec.ft)];
    }
    std::cout << "wrote " << ds.size() << " records to " << args.out_path
              << '\n';
    std::cout << "clean " << ds.count_clean() << "  fraud "
              << ds.count_fraud() << '\n';
    std::cout << "fraud types:";
    for (std::size_t t = 1; t < per_type.size(); ++t) {
        std::cout << ' ' << t << '=' << per_type[t];
    }
    std::cout << '\n';
    return kExitOk;
}

int run_train(const TrainArgs& args) {
    const TaskKind task = parse_task(args.task);
    const CsvData csv = read_csv_file(args.data_path);
    const TrainedModel model = train_model(csv.dataset, task, args.opts);

    // Training-set fit, for a quick sanity read on the run.
    const LabelMode mode =
        task == TaskKind::binary ? LabelMode::binary : LabelMode::multiclass;
    const LabelView view =
        derive_labels(csv.dataset, mode,
                      task == TaskKind::multiclass && args.opts.include_clean);
    const Matrix features =
        transform(csv.dataset, view.row_indices, model.stats);
    const EvalResult fit = evaluate(model.config, model.params, features,
                                    view.labels);

    save_model_file(model, args.out_path);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "train loss %.4f  train accuracy %.4f",
                  fit.loss, fit.accuracy);
    std::cout << "trained " << task_name(task) << " model on "
              << view.row_indices.size() << " rows ("
              << model.config.output_classes << " classes)\n"
              << buf << '\n'
              << "model written to " << args.out_path << '\n';
    return kExitOk;
}

int run_crossval(const CrossvalArgs& args) {
    const TaskKind task = parse_task(args.task);
    const CsvData csv = read_csv_file(args.data_path);
    const CrossValReport report =
        cross_validate(csv.dataset, task, args.opts);

    std::cout << "task " << task_name(task) << "  classes "
              << report.output_classes << "  samples " << report.sample_count
              << "  folds " << report.folds.size() << '\n';
    std::cout << render_crossval_table(report);
    if (!args.report_path.empty()) {
        std::ofstream out(args.report_path);
        if (!out) {
            throw IoError("cannot open " + args.report_path +
                          " for writing");
        }
        write_crossval_jsonl(report, args.opts, out);
        out.flush();
        if (!out) throw IoError("failed writing " + args.report_path);
    }
    return kExitOk;
}

int run_predict(const PredictArgs& args) {
    const TrainedModel model = load_model_file(args.model_path);

    const std::string text = read_text_file(args.data_path);
    if (trim(text).empty()) {
        const Dataset empty;
        std::cout << render_prediction_table(empty, {}, false);
        return kExitOk;
    }
    std::istringstream in(text);
    CsvOptions csv_options;
    csv_options.require_ft = false;
    const CsvData csv = parse_csv(in, csv_options);

    std::vector<std::size_t> rows(csv.dataset.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    if (args.sample != 0 && args.sample < rows.size()) {
        std::mt19937_64 rng(args.seed);
        // Partial Fisher-Yates: the first `sample` slots are a uniform
        // draw without replacement.
        for (std::size_t i = 0; i < args.sample; ++i) {
            const std::size_t j =
                i + static_cast<std::size_t>(
                        bounded_u64(rng, rows.size() - i));
            std::swap(rows[i], rows[j]);
        }
        rows.resize(args.sample);
        std::sort(rows.begin(), rows.end());
    }

    const std::vector<Prediction> predictions =
        predict_rows(model, csv.dataset, csv.has_ft, rows);
    std::cout << render_prediction_table(csv.dataset, predictions,
                                         csv.has_ft);
    if (!args.out_path.empty()) {
        std::ofstream out(args.out_path);
        if (!out) {
            throw IoError("cannot open " + args.out_path + " for writing");
        }
        write_predictions_jsonl(predictions, model, out);
        out.flush();
        if (!out) throw IoError("failed writing " + args.out_path);
    }
    return kExitOk;
}

int run_inspect(const InspectArgs& args) {
    CsvOptions csv_options;
    csv_options.require_ft = false;
    const CsvData csv = read_csv_file(args.data_path, csv_options);
    const Dataset& ds = csv.dataset;
    std::cout << "rows " << ds.size() << "  ft column "
              << (csv.has_ft ? "present" : "absent") << '\n';
    if (ds.empty()) return kExitOk;

    if (csv.has_ft) {
        std::vector<std::size_t> per_type(
            static_cast<std::size_t>(ds.max_fraud_type()) + 1, 0);
        for (const ProcurementRecord& rec : ds.records) {
            ++per_type[static_cast<std::size_t>(rec.ft)];
        }
        std::cout << "clean " << ds.count_clean() << "  fraud "
                  << ds.count_fraud() << '\n';
        std::cout << "fraud types:";
        for (std::size_t t = 1; t < per_type.size(); ++t) {
            std::cout << ' ' << t << '=' << per_type[t];
        }
        std::cout << '\n';
    }

    const NormalizationStats stats = fit(ds);
    std::cout << "feature ranges:\n";
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        std::cout << "  " << kFeatureNames[i] << " ["
                  << format_double(stats.min[i]) << ", "
                  << format_double(stats.max[i]) << "]\n";
    }

    if (!args.config_path.empty() && csv.has_ft) {
        const GeneratorConfig cfg = load_generator_config(args.config_path);
        const ArchetypeRules rules = rules_for(cfg);
        std::size_t agree = 0;
        for (const ProcurementRecord& rec : ds.records) {
            if (archetype_of(rec, rules) == rec.ft) ++agree;
        }
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.6f",
                      static_cast<double>(agree) /
                          static_cast<double>(ds.size()));
        std::cout << "rule agreement " << agree << '/' << ds.size() << " = "
                  << buf << '\n';
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"procurement fraud audit toolkit: synthetic data, MLP "
                 "training, cross validation and prediction reports"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "procaudit 0.1.0");

    GenerateArgs gen_args;
    CLI::App* gen = app.add_subcommand(
        "generate", "write a synthetic procurement CSV");
    gen->add_option("--out", gen_args.out_path, "output CSV path")
        ->required();
    gen->add_option("--config", gen_args.config_path,
                    "key=value generator config file");
    gen->add_option("--n", gen_args.n, "record count (default 50000)");
    gen->add_option("--fraud-ratio", gen_args.fraud_ratio,
                    "planted fraud fraction in (0,1) (default 0.5)");
    gen->add_option("--k-fraud", gen_args.k_fraud,
                    "fraud type count, 2..5 (default 5)");
    gen->add_option("--noise", gen_args.noise,
                    "label noise rate in [0,0.5) (default 0)");
    gen->add_option("--seed", gen_args.seed, "generator seed (default 1)")
        ->envname("PROCAUDIT_SEED");

    TrainArgs train_args;
    CLI::App* train = app.add_subcommand(
        "train", "train one model on a full CSV and persist it");
    train->add_option("--data", train_args.data_path, "labeled CSV")
        ->required();
    train->add_option("--task", train_args.task, "binary or multiclass")
        ->required();
    train->add_option("--out", train_args.out_path, "model file path")
        ->required();
    add_train_flags(train, train_args.opts);

    CrossvalArgs cv_args;
    CLI::App* crossval = app.add_subcommand(
        "crossval", "k-fold cross validation with a per-fold report");
    crossval->add_option("--data", cv_args.data_path, "labeled CSV")
        ->required();
    crossval->add_option("--task", cv_args.task, "binary or multiclass")
        ->required();
    crossval->add_option("--k", cv_args.opts.k, "fold count")
        ->capture_default_str();
    add_train_flags(crossval, cv_args.opts);
    crossval->add_flag("--stratified", cv_args.opts.stratified,
                       "deal each class round-robin across folds");
    crossval->add_option("--jobs", cv_args.opts.jobs,
                         "max parallel folds (0 = min(k, cores))")
        ->envname("PROCAUDIT_JOBS")
        ->capture_default_str();
    crossval->add_option("--report", cv_args.report_path,
                         "JSON-lines report path");

    PredictArgs pred_args;
    CLI::App* predict = app.add_subcommand(
        "predict", "score a CSV with a saved model");
    predict->add_option("--model", pred_args.model_path, "model file")
        ->required();
    predict->add_option("--data", pred_args.data_path,
                        "CSV to score (FT column optional)")
        ->required();
    predict->add_option("--out", pred_args.out_path,
                        "JSON-lines report path");
    predict->add_option("--sample", pred_args.sample,
                        "score only this many randomly chosen rows");
    predict->add_option("--seed", pred_args.seed, "row-sampling seed")
        ->envname("PROCAUDIT_SEED")
        ->capture_default_str();

    InspectArgs inspect_args;
    CLI::App* inspect = app.add_subcommand(
        "inspect", "summarize a CSV: class counts and feature ranges");
    inspect->add_option("--data", inspect_args.data_path, "CSV path")
        ->required();
    inspect->add_option("--config", inspect_args.config_path,
                        "generator config for a rule-agreement check");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (gen->parsed()) return run_generate(gen_args, gen);
        if (train->parsed()) return run_train(train_args);
        if (crossval->parsed()) return run_crossval(cv_args);
        if (predict->parsed()) return run_predict(pred_args);
        if (inspect->parsed()) return run_inspect(inspect_args);
        std::cerr << "error: no subcommand\n";
        return kExitUsage;
    } catch (const ArgumentError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const procaudit::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const StratificationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}
