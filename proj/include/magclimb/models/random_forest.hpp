// Random forest of CART trees split on Gini impurity.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "magclimb/models/labels.hpp"

namespace magclimb::models {

struct RfConfig {
  std::size_t trees = 100;
  std::size_t max_depth = 0;          ///< 0 = grow until pure
  std::size_t min_samples_split = 2;
  std::size_t max_features = 0;       ///< features tried per split; 0 = floor(sqrt(d))
  bool bootstrap = true;
  std::uint64_t seed = 0;
};

struct TreeNode {
  int feature = -1;  ///< -1 marks a leaf
  double threshold = 0.0;  ///< x[feature] <= threshold goes left
  int left = -1;
  int right = -1;
  HazardLabel label = HazardLabel::Safe;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  ///< nodes[0] is the root
  HazardLabel predict(std::span<const double> x) const;
};

struct RandomForest {
  std::size_t features = 0;
  std::vector<DecisionTree> trees;
};

/// 1 - sum_c p_c^2 over the label multiset; 0 for an empty set.
double gini_impurity(std::span<const HazardLabel> labels);

/// Each tree sees a bootstrap resample (when enabled) and draws a random feature subset at
/// every split; splits with zero impurity decrease are still taken while they separate
/// distinct values. Deterministic per seed. Throws DataError for an empty training set.
RandomForest rf_train(const std::vector<std::vector<double>>& x, const std::vector<HazardLabel>& y,
                      const RfConfig& cfg);

/// Majority vote over trees; ties go to the smallest label index.
HazardLabel rf_classify(const RandomForest& forest, std::span<const double> x);

nlohmann::json to_json(const RandomForest& forest);
RandomForest forest_from_json(const nlohmann::json& j);

}  // namespace magclimb::models
