#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "magclimb/models/labels.hpp"

namespace magclimb::models {

/// Majority label among the K nearest training points (Euclidean distance).
/// Equal distances keep the earlier training index; a tie in votes goes to the smallest
/// label index. Throws DataError for an empty training set or mismatched widths, and
/// ConfigError unless 1 <= K <= training size.
HazardLabel knn_classify(const std::vector<std::vector<double>>& train_x, const std::vector<HazardLabel>& train_y,
                         std::span<const double> query, std::size_t k);

}  // namespace magclimb::models
