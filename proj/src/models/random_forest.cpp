#include "magclimb/models/random_forest.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "magclimb/common/errors.hpp"
#include "magclimb/common/rng.hpp"

namespace magclimb::models {

double gini_impurity(std::span<const HazardLabel> labels) {
  if (labels.empty()) return 0.0;
  std::array<double, kClassCount> counts{};
  for (auto l : labels) counts[index_of(l)] += 1.0;
  double g = 1.0;
  const double n = static_cast<double>(labels.size());
  for (double c : counts) g -= (c / n) * (c / n);
  return g;
}

HazardLabel DecisionTree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return nodes[i].label;
}

namespace {

using Counts = std::array<std::size_t, kClassCount>;

double gini_of(const Counts& c, std::size_t n) {
  if (n == 0) return 0.0;
  double g = 1.0;
  for (auto v : c) {
    const double p = static_cast<double>(v) / static_cast<double>(n);
    g -= p * p;
  }
  return g;
}

HazardLabel majority(const Counts& c) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < kClassCount; ++k) {
    if (c[k] > c[best]) best = k;
  }
  return static_cast<HazardLabel>(best);
}

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<std::vector<double>>& x, const std::vector<HazardLabel>& y, const RfConfig& cfg,
              std::size_t features_per_split, Rng& rng)
      : x_(x), y_(y), cfg_(cfg), mtry_(features_per_split), rng_(rng) {}

  DecisionTree build(std::vector<std::size_t> rows) {
    tree_.nodes.clear();
    grow(rows, 0);
    return std::move(tree_);
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double impurity = 0.0;
  };

  int grow(std::vector<std::size_t>& rows, std::size_t depth) {
    Counts counts{};
    for (auto r : rows) ++counts[index_of(y_[r])];
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back(TreeNode{});
    tree_.nodes[static_cast<std::size_t>(id)].label = majority(counts);
    const bool pure = std::count(counts.begin(), counts.end(), 0u) == static_cast<long>(kClassCount - 1);
    if (pure || rows.size() < cfg_.min_samples_split || (cfg_.max_depth > 0 && depth >= cfg_.max_depth)) return id;

    const Split split = choose_split(rows);
    if (split.feature < 0) return id;
    std::vector<std::size_t> left, right;
    for (auto r : rows) {
      (x_[r][static_cast<std::size_t>(split.feature)] <= split.threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  // Tries a random subset of mtry features; if none of them separates the rows, keeps
  // drawing from the remaining features.
  Split choose_split(const std::vector<std::size_t>& rows) {
    const std::size_t d = x_.front().size();
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = 0; i + 1 < d; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(uniform01(rng_) * static_cast<double>(d - i));
      std::swap(order[i], order[j]);
    }
    Split best;
    for (std::size_t k = 0; k < d; ++k) {
      if (k >= mtry_ && best.feature >= 0) break;
      evaluate_feature(rows, order[k], best);
    }
    return best;
  }

  void evaluate_feature(const std::vector<std::size_t>& rows, std::size_t f, Split& best) {
    std::vector<std::pair<double, HazardLabel>> v;
    v.reserve(rows.size());
    for (auto r : rows) v.emplace_back(x_[r][f], y_[r]);
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
      return a.first < b.first || (a.first == b.first && a.second < b.second);
    });
    Counts total{};
    for (const auto& p : v) ++total[index_of(p.second)];
    Counts left{};
    const std::size_t n = v.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      ++left[index_of(v[i].second)];
      if (!(v[i].first < v[i + 1].first)) continue;
      Counts right{};
      for (std::size_t c = 0; c < kClassCount; ++c) right[c] = total[c] - left[c];
      const std::size_t nl = i + 1, nr = n - nl;
      const double imp = (static_cast<double>(nl) * gini_of(left, nl) + static_cast<double>(nr) * gini_of(right, nr)) /
                         static_cast<double>(n);
      if (best.feature < 0 || imp < best.impurity) {
        double mid = v[i].first + (v[i + 1].first - v[i].first) / 2.0;
        if (!(mid < v[i + 1].first)) mid = v[i].first;
        best = {static_cast<int>(f), mid, imp};
      }
    }
  }

  const std::vector<std::vector<double>>& x_;
  const std::vector<HazardLabel>& y_;
  const RfConfig& cfg_;
  std::size_t mtry_;
  Rng& rng_;
  DecisionTree tree_;
};

}  // namespace

RandomForest rf_train(const std::vector<std::vector<double>>& x, const std::vector<HazardLabel>& y,
                      const RfConfig& cfg) {
  if (x.empty()) throw DataError("random forest needs a non-empty training set");
  if (x.size() != y.size()) throw DataError("random forest features and labels differ in count");
  if (cfg.trees == 0) throw ConfigError("random forest needs at least one tree");
  const std::size_t d = x.front().size();
  if (d == 0) throw DataError("random forest needs at least one feature");
  for (const auto& row : x) {
    if (row.size() != d) throw DataError("random forest rows have different widths");
  }
  std::size_t mtry = cfg.max_features;
  if (mtry == 0) mtry = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(d)))));
  mtry = std::min(mtry, d);

  RandomForest forest;
  forest.features = d;
  for (std::size_t t = 0; t < cfg.trees; ++t) {
    Rng rng = make_rng(cfg.seed, t);
    std::vector<std::size_t> rows(x.size());
    if (cfg.bootstrap) {
      for (auto& r : rows) r = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(x.size()));
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    TreeBuilder builder(x, y, cfg, mtry, rng);
    forest.trees.push_back(builder.build(std::move(rows)));
  }
  return forest;
}

HazardLabel rf_classify(const RandomForest& forest, std::span<const double> x) {
  if (forest.trees.empty()) throw DataError("random forest has no trees");
  if (x.size() != forest.features) throw DataError("query width differs from the forest's feature count");
  Counts votes{};
  for (const auto& t : forest.trees) ++votes[index_of(t.predict(x))];
  return majority(votes);
}

nlohmann::json to_json(const RandomForest& forest) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : forest.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : t.nodes) {
      nodes.push_back({n.feature, n.threshold, n.left, n.right, static_cast<int>(n.label)});
    }
    trees.push_back(nodes);
  }
  return {{"features", forest.features}, {"trees", trees}};
}

RandomForest forest_from_json(const nlohmann::json& j) {
  try {
    RandomForest f;
    f.features = j.at("features").get<std::size_t>();
    for (const auto& t : j.at("trees")) {
      DecisionTree tree;
      for (const auto& n : t) {
        TreeNode node;
        node.feature = n.at(0).get<int>();
        node.threshold = n.at(1).get<double>();
        node.left = n.at(2).get<int>();
        node.right = n.at(3).get<int>();
        node.label = label_from_index(n.at(4).get<int>());
        tree.nodes.push_back(node);
      }
      const auto count = static_cast<int>(tree.nodes.size());
      for (const auto& node : tree.nodes) {
        if (node.feature >= 0 && (node.left <= 0 || node.right <= 0 || node.left >= count || node.right >= count ||
                                  static_cast<std::size_t>(node.feature) >= f.features)) {
          throw ConfigError("random forest node references are out of range");
        }
      }
      if (tree.nodes.empty()) throw ConfigError("random forest tree has no nodes");
      f.trees.push_back(std::move(tree));
    }
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("random forest JSON: ") + e.what());
  }
}

}  // namespace magclimb::models
