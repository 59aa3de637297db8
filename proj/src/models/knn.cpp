#include "magclimb/models/knn.hpp"

#include <algorithm>
#include <array>
#include <numeric>

#include "magclimb/common/errors.hpp"

namespace magclimb::models {

HazardLabel knn_classify(const std::vector<std::vector<double>>& train_x, const std::vector<HazardLabel>& train_y,
                         std::span<const double> query, std::size_t k) {
  if (train_x.empty()) throw DataError("knn needs a non-empty training set");
  if (train_x.size() != train_y.size()) throw DataError("knn training features and labels differ in count");
  if (k == 0 || k > train_x.size()) {
    throw ConfigError("knn K=" + std::to_string(k) + " must lie in 1.." + std::to_string(train_x.size()));
  }
  // Squared distances preserve the ordering and avoid a sqrt per point.
  std::vector<double> dist(train_x.size());
  for (std::size_t i = 0; i < train_x.size(); ++i) {
    if (train_x[i].size() != query.size()) throw DataError("knn query width differs from training width");
    double d = 0.0;
    for (std::size_t j = 0; j < query.size(); ++j) {
      const double diff = train_x[i][j] - query[j];
      d += diff * diff;
    }
    dist[i] = d;
  }
  std::vector<std::size_t> order(train_x.size());
  std::iota(order.begin(), order.end(), 0);
  auto closer = [&](std::size_t a, std::size_t b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), closer);
  std::array<std::size_t, kClassCount> votes{};
  for (std::size_t i = 0; i < k; ++i) ++votes[index_of(train_y[order[i]])];
  std::size_t best = 0;
  for (std::size_t c = 1; c < kClassCount; ++c) {
    if (votes[c] > votes[best]) best = c;
  }
  return static_cast<HazardLabel>(best);
}

}  // namespace magclimb::models
