#pragma once

#include <iosfwd>
#include <string>

#include "procaudit/network.hpp"
#include "procaudit/normalize.hpp"

namespace procaudit {

enum class TaskKind { binary, multiclass };

TaskKind parse_task(std::string_view name); // "binary" | "multiclass"
std::string_view task_name(TaskKind task);

// Everything needed to score new records: the architecture, the trained
// weights and the normalization fitted on the training data.
struct TrainedModel {
    NetworkConfig config;
    TaskKind task = TaskKind::binary;
    // Displayed label = class index + label_offset. Binary and
    // clean-inclusive multiclass use 0; fraud-only multiclass uses 1 so
    // class 0 maps back to fraud type 1.
    int label_offset = 0;
    NormalizationStats stats;
    NetworkParameters params;
};

// Text format, line oriented:
//   procaudit-model v1
//   task <binary|multiclass>
//   input_dim/hidden_dim/dropout_ratio/output_classes/seed/label_offset lines
//   norm <feature> <min> <max>          (one per feature, in order)
//   params w1 <rows> <cols>             then <rows> lines of <cols> doubles
//   ... b1, w2, b2, w3, b3 the same way (vectors as 1 x n)
//   end
// Doubles use shortest round-trip form, so save/load is bit-exact.
void save_model(const TrainedModel& model, std::ostream& out);
void save_model_file(const TrainedModel& model, const std::string& path);

// Throws FormatError on version/field/shape problems, ParseError on bad
// numbers, IoError when the file cannot be read.
TrainedModel load_model(std::istream& in);
TrainedModel load_model_file(const std::string& path);

} // namespace procaudit
