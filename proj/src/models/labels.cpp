#include "magclimb/models/labels.hpp"

#include <algorithm>

#include "magclimb/common/errors.hpp"

namespace magclimb::models {

HazardLabel label_from_index(long long index) {
  if (index < 0 || index >= static_cast<long long>(kClassCount)) {
    throw ConfigError("label index " + std::to_string(index) + " outside 0..2");
  }
  return static_cast<HazardLabel>(index);
}

const char* to_string(HazardLabel l) {
  switch (l) {
    case HazardLabel::Safe:
      return "Safe";
    case HazardLabel::PotentialHazard:
      return "PotentialHazard";
    case HazardLabel::HazardOccurred:
      return "HazardOccurred";
  }
  return "?";
}

HazardLabel label_from_string(const std::string& name) {
  for (auto l : kAllLabels) {
    if (name == to_string(l)) return l;
  }
  throw ConfigError("unknown hazard label '" + name + "'");
}

std::vector<double> one_hot(HazardLabel l, std::size_t classes) {
  if (index_of(l) >= classes) throw ConfigError("label does not fit in " + std::to_string(classes) + " classes");
  std::vector<double> v(classes, 0.0);
  v[index_of(l)] = 1.0;
  return v;
}

namespace {

template <typename T>
std::size_t argmax_impl(std::span<const T> values) {
  if (values.empty()) throw DataError("argmax of an empty vector");
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

}  // namespace

std::size_t argmax(std::span<const double> values) { return argmax_impl(values); }
std::size_t argmax(std::span<const float> values) { return argmax_impl(values); }

void WindowSet::validate() const {
  if (windows.empty()) throw DataError("empty window set");
  if (windows.size() != labels.size()) throw DataError("window and label counts differ");
  const std::size_t len = windows.front().size();
  if (len == 0) throw DataError("windows must be non-empty");
  for (const auto& w : windows) {
    if (w.size() != len) throw DataError("windows have different lengths");
  }
}

}  // namespace magclimb::models
