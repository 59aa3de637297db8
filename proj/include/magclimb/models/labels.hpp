#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace magclimb::models {

/// Hazard state of the climbing robot; indices are fixed and used as class ids.
enum class HazardLabel : int { Safe = 0, PotentialHazard = 1, HazardOccurred = 2 };

inline constexpr std::size_t kClassCount = 3;
inline constexpr std::array<HazardLabel, kClassCount> kAllLabels{HazardLabel::Safe, HazardLabel::PotentialHazard,
                                                                 HazardLabel::HazardOccurred};

constexpr std::size_t index_of(HazardLabel l) { return static_cast<std::size_t>(l); }

/// Throws ConfigError for indices outside 0..2.
HazardLabel label_from_index(long long index);

const char* to_string(HazardLabel l);
HazardLabel label_from_string(const std::string& name);

/// Unit basis vector at the label index.
std::vector<double> one_hot(HazardLabel l, std::size_t classes = kClassCount);

/// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);
std::size_t argmax(std::span<const float> values);

/// Windows with their labels, the common input of every classifier.
struct WindowSet {
  std::vector<std::vector<double>> windows;
  std::vector<HazardLabel> labels;

  std::size_t size() const { return windows.size(); }
  /// Throws DataError if empty, ragged, or labels and windows disagree in count.
  void validate() const;
};

}  // namespace magclimb::models
