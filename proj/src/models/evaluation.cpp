#include "magclimb/models/evaluation.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "magclimb/common/errors.hpp"

namespace magclimb::models {

EvalReport make_report(const std::vector<HazardLabel>& truth, const std::vector<HazardLabel>& predicted) {
  if (truth.empty()) throw DataError("cannot evaluate on an empty test set");
  if (truth.size() != predicted.size()) throw DataError("truth and prediction counts differ");
  EvalReport r;
  r.total = truth.size();
  for (std::size_t i = 0; i < truth.size(); ++i) ++r.confusion[index_of(truth[i])][index_of(predicted[i])];
  std::size_t trace = 0;
  for (std::size_t c = 0; c < kClassCount; ++c) {
    trace += r.confusion[c][c];
    std::size_t row = 0;
    for (auto v : r.confusion[c]) row += v;
    r.recall[c] = row == 0 ? std::numeric_limits<double>::quiet_NaN()
                           : static_cast<double>(r.confusion[c][c]) / static_cast<double>(row);
  }
  r.accuracy = static_cast<double>(trace) / static_cast<double>(r.total);
  return r;
}

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json recall = nlohmann::json::object();
  for (auto l : kAllLabels) {
    const double v = r.recall[index_of(l)];
    recall[to_string(l)] = std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v);
  }
  nlohmann::json labels = nlohmann::json::array();
  for (auto l : kAllLabels) labels.push_back(to_string(l));
  return {{"total", r.total},
          {"accuracy", r.accuracy},
          {"labels", labels},
          {"confusion", r.confusion},
          {"recall", recall}};
}

EvalReport eval_report_from_json(const nlohmann::json& j) {
  try {
    EvalReport r;
    r.total = j.at("total").get<std::size_t>();
    r.accuracy = j.at("accuracy").get<double>();
    r.confusion = j.at("confusion").get<ConfusionMatrix>();
    for (auto l : kAllLabels) {
      const auto& v = j.at("recall").at(to_string(l));
      r.recall[index_of(l)] = v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("evaluation report JSON: ") + e.what());
  }
}

std::string confusion_table(const EvalReport& r) {
  std::ostringstream out;
  out << std::left << std::setw(18) << "true \\ predicted";
  for (auto l : kAllLabels) out << std::right << std::setw(17) << to_string(l);
  out << '\n';
  for (auto t : kAllLabels) {
    out << std::left << std::setw(18) << to_string(t);
    for (auto p : kAllLabels) out << std::right << std::setw(17) << r.confusion[index_of(t)][index_of(p)];
    out << '\n';
  }
  out << "accuracy " << std::fixed << std::setprecision(4) << r.accuracy << " (" << r.total << " samples)\n";
  return out.str();
}

}  // namespace magclimb::models
