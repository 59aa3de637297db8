#pragma once

#include <array>
#include <string>
#include <vector>

#include <json.hpp>

#include "magclimb/models/labels.hpp"

namespace magclimb::models {

using ConfusionMatrix = std::array<std::array<std::size_t, kClassCount>, kClassCount>;

/// Rows are true labels, columns predicted labels.
struct EvalReport {
  std::size_t total = 0;
  double accuracy = 0.0;  ///< trace(confusion) / total
  ConfusionMatrix confusion{};
  /// Per-class recall; NaN for a class absent from the truth labels.
  std::array<double, kClassCount> recall{};
};

/// Throws DataError for empty or mismatched inputs.
EvalReport make_report(const std::vector<HazardLabel>& truth, const std::vector<HazardLabel>& predicted);

nlohmann::json to_json(const EvalReport& r);
EvalReport eval_report_from_json(const nlohmann::json& j);

/// Fixed-width text table with row and column headers.
std::string confusion_table(const EvalReport& r);

}  // namespace magclimb::models
