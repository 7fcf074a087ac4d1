#include "procaudit/model_io.hpp"

#include <fstream>
#include <sstream>

#include "procaudit/dataset.hpp"
#include "procaudit/errors.hpp"
#include "procaudit/textio.hpp"

namespace procaudit {

namespace {

constexpr const char* kMagic = "procaudit-model v1";

void write_array(std::ostream& out, const char* name,
                 const std::vector<double>& data, std::size_t rows,
                 std::size_t cols) {
    out << "params " << name << ' ' << rows << ' ' << cols << '\n';
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            if (c != 0) out << ' ';
            out << format_double(data[r * cols + c]);
        }
        out << '\n';
    }
}

std::string next_line(std::istream& in, const char* what) {
    std::string line;
    if (!std::getline(in, line)) {
        throw FormatError(std::string("model file: truncated, expected ") +
                          what);
    }
    return std::string(trim(line));
}

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

void read_array(std::istream& in, const char* name, std::vector<double>& data,
                std::size_t rows, std::size_t cols) {
    const auto header = split_ws(next_line(in, "a params header"));
    if (header.size() != 4 || header[0] != "params" || header[1] != name) {
        throw FormatError(std::string("model file: expected 'params ") + name +
                          " <rows> <cols>'");
    }
    const auto got_rows =
        static_cast<std::size_t>(parse_int64(header[2], "params rows"));
    const auto got_cols =
        static_cast<std::size_t>(parse_int64(header[3], "params cols"));
    if (got_rows != rows || got_cols != cols) {
        throw FormatError(std::string("model file: ") + name + " is " +
                          header[2] + "x" + header[3] + ", config implies " +
                          std::to_string(rows) + "x" + std::to_string(cols));
    }
    data.resize(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const auto cells = split_ws(next_line(in, "a params row"));
        if (cells.size() != cols) {
            throw FormatError(std::string("model file: ") + name + " row " +
                              std::to_string(r) + " has " +
                              std::to_string(cells.size()) + " values, need " +
                              std::to_string(cols));
        }
        for (std::size_t c = 0; c < cols; ++c) {
            data[r * cols + c] = parse_double(cells[c], "model weight");
        }
    }
}

std::string field_value(std::istream& in, const char* key) {
    const auto parts = split_ws(next_line(in, key));
    if (parts.size() != 2 || parts[0] != key) {
        throw FormatError(std::string("model file: expected '") + key +
                          " <value>'");
    }
    return parts[1];
}

} // namespace

TaskKind parse_task(std::string_view name) {
    if (name == "binary") return TaskKind::binary;
    if (name == "multiclass") return TaskKind::multiclass;
    throw ArgumentError("unknown task '" + std::string(name) +
                        "' (expected binary or multiclass)");
}

std::string_view task_name(TaskKind task) {
    return task == TaskKind::binary ? "binary" : "multiclass";
}

void save_model(const TrainedModel& model, std::ostream& out) {
    const NetworkConfig& cfg = model.config;
    out << kMagic << '\n';
    out << "task " << task_name(model.task) << '\n';
    out << "input_dim " << cfg.input_dim << '\n';
    out << "hidden_dim " << cfg.hidden_dim << '\n';
    out << "dropout_ratio " << format_double(cfg.dropout_ratio) << '\n';
    out << "output_classes " << cfg.output_classes << '\n';
    out << "seed " << cfg.seed << '\n';
    out << "label_offset " << model.label_offset << '\n';
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        out << "norm " << kFeatureNames[i] << ' '
            << format_double(model.stats.min[i]) << ' '
            << format_double(model.stats.max[i]) << '\n';
    }
    write_array(out, "w1", model.params.w1.data, cfg.input_dim,
                cfg.hidden_dim);
    write_array(out, "b1", model.params.b1, 1, cfg.hidden_dim);
    write_array(out, "w2", model.params.w2.data, cfg.hidden_dim,
                cfg.hidden_dim);
    write_array(out, "b2", model.params.b2, 1, cfg.hidden_dim);
    write_array(out, "w3", model.params.w3.data, cfg.hidden_dim,
                cfg.output_classes);
    write_array(out, "b3", model.params.b3, 1, cfg.output_classes);
    out << "end\n";
}

void save_model_file(const TrainedModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    save_model(model, out);
    out.flush();
    if (!out) throw IoError("failed writing " + path);
}

TrainedModel load_model(std::istream& in) {
    if (next_line(in, "the header") != kMagic) {
        throw FormatError(std::string("model file: first line must be '") +
                          kMagic + "'");
    }
    TrainedModel model;
    model.task = parse_task(field_value(in, "task"));
    model.config.input_dim = static_cast<std::size_t>(
        parse_int64(field_value(in, "input_dim"), "input_dim"));
    model.config.hidden_dim = static_cast<std::size_t>(
        parse_int64(field_value(in, "hidden_dim"), "hidden_dim"));
    model.config.dropout_ratio =
        parse_double(field_value(in, "dropout_ratio"), "dropout_ratio");
    model.config.output_classes = static_cast<std::size_t>(
        parse_int64(field_value(in, "output_classes"), "output_classes"));
    model.config.seed = static_cast<std::uint64_t>(
        parse_int64(field_value(in, "seed"), "seed"));
    model.label_offset = static_cast<int>(
        parse_int64(field_value(in, "label_offset"), "label_offset"));
    if (model.label_offset != 0 && model.label_offset != 1) {
        throw FormatError("model file: label_offset must be 0 or 1");
    }
    try {
        model.config.validate();
    } catch (const ArgumentError& e) {
        throw FormatError(std::string("model file: ") + e.what());
    }
    if (model.config.input_dim != kFeatureCount) {
        throw FormatError("model file: input_dim must be " +
                          std::to_string(kFeatureCount));
    }
    if (model.task == TaskKind::binary && model.config.output_classes != 2) {
        throw FormatError("model file: binary task needs output_classes 2");
    }
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        const auto parts = split_ws(next_line(in, "a norm line"));
        if (parts.size() != 4 || parts[0] != "norm" ||
            parts[1] != kFeatureNames[i]) {
            throw FormatError(std::string("model file: expected 'norm ") +
                              std::string(kFeatureNames[i]) + " <min> <max>'");
        }
        model.stats.min[i] = parse_double(parts[2], "norm min");
        model.stats.max[i] = parse_double(parts[3], "norm max");
        if (model.stats.min[i] > model.stats.max[i]) {
            throw FormatError(std::string("model file: norm min > max for ") +
                              std::string(kFeatureNames[i]));
        }
    }
    const NetworkConfig& cfg = model.config;
    model.params = NetworkParameters::shaped(cfg);
    read_array(in, "w1", model.params.w1.data, cfg.input_dim, cfg.hidden_dim);
    read_array(in, "b1", model.params.b1, 1, cfg.hidden_dim);
    read_array(in, "w2", model.params.w2.data, cfg.hidden_dim,
               cfg.hidden_dim);
    read_array(in, "b2", model.params.b2, 1, cfg.hidden_dim);
    read_array(in, "w3", model.params.w3.data, cfg.hidden_dim,
               cfg.output_classes);
    read_array(in, "b3", model.params.b3, 1, cfg.output_classes);
    if (next_line(in, "the end marker") != "end") {
        throw FormatError("model file: missing 'end' marker");
    }
    return model;
}

TrainedModel load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return load_model(in);
}

} // namespace procaudit
