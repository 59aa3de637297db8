#pragma once

#include <array>
#include <span>
#include <vector>

namespace magclimb::models {

inline constexpr std::size_t kFeatureCount = 5;
using FeatureVector = std::array<double, kFeatureCount>;

/// [mean, population variance, max, min, Euclidean norm]. Throws DataError when empty.
FeatureVector sliding_window_features(std::span<const double> window);

std::vector<FeatureVector> feature_rows(const std::vector<std::vector<double>>& windows);

/// Per-column mean and population std fitted on training rows; zero-variance columns pass
/// through centered.
struct FeatureScaler {
  FeatureVector mean{};
  FeatureVector scale{1, 1, 1, 1, 1};

  static FeatureScaler fit(const std::vector<FeatureVector>& rows);
  FeatureVector apply(const FeatureVector& row) const;
};

}  // namespace magclimb::models
