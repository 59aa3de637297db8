#include "magclimb/models/features.hpp"

#include <algorithm>
#include <cmath>

#include "magclimb/common/errors.hpp"

namespace magclimb::models {

FeatureVector sliding_window_features(std::span<const double> w) {
  if (w.empty()) throw DataError("features of an empty window");
  const double n = static_cast<double>(w.size());
  double sum = 0.0, sq = 0.0;
  for (double v : w) {
    sum += v;
    sq += v * v;
  }
  const double mean = sum / n;
  double var = 0.0;
  for (double v : w) var += (v - mean) * (v - mean);
  const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
  return {mean, var / n, *hi, *lo, std::sqrt(sq)};
}

std::vector<FeatureVector> feature_rows(const std::vector<std::vector<double>>& windows) {
  std::vector<FeatureVector> rows;
  rows.reserve(windows.size());
  for (const auto& w : windows) rows.push_back(sliding_window_features(w));
  return rows;
}

FeatureScaler FeatureScaler::fit(const std::vector<FeatureVector>& rows) {
  if (rows.empty()) throw DataError("cannot fit a scaler on no rows");
  FeatureScaler s;
  const double n = static_cast<double>(rows.size());
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    double m = 0.0;
    for (const auto& r : rows) m += r[j];
    m /= n;
    double v = 0.0;
    for (const auto& r : rows) v += (r[j] - m) * (r[j] - m);
    const double sd = std::sqrt(v / n);
    s.mean[j] = m;
    s.scale[j] = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

FeatureVector FeatureScaler::apply(const FeatureVector& row) const {
  FeatureVector out;
  for (std::size_t j = 0; j < kFeatureCount; ++j) out[j] = (row[j] - mean[j]) / scale[j];
  return out;
}

}  // namespace magclimb::models
