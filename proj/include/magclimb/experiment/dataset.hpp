#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "magclimb/experiment/plan.hpp"
#include "magclimb/models/labels.hpp"

namespace magclimb::experiment {

struct Provenance {
  double angle_deg = 0.0;
  int level = 0;
  int plate_count = 6;
  SensorKind sensor = SensorKind::Body;
  std::size_t run = 0;        ///< simulation index within (angle, N)
  std::uint64_t sim_seed = 0;
  std::size_t offset = 0;     ///< first sample of the window, after the warm-up

  /// e.g. "a55_l3_n6_r07"
  std::string scenario_id() const;
  bool operator==(const Provenance&) const = default;
};

struct LabeledWindow {
  std::vector<double> values;
  models::HazardLabel label = models::HazardLabel::Safe;
  Provenance provenance;

  bool operator==(const LabeledWindow&) const = default;
};

/// Normalization fitted on one (angle, level, sensor) group.
struct GroupNorm {
  double angle_deg = 0.0;
  int level = 0;
  SensorKind sensor = SensorKind::Body;
  dsp::NormParams params;

  bool operator==(const GroupNorm&) const = default;
};

struct Dataset {
  std::vector<LabeledWindow> windows;
  std::vector<GroupNorm> norms;

  std::size_t size() const { return windows.size(); }
  models::WindowSet window_set() const;
  bool operator==(const Dataset&) const = default;
};

/// Restricts generation; empty lists mean every level or sensor of the plan.
struct DatasetScope {
  std::vector<int> levels;
  std::vector<SensorKind> sensors;
};

/// Simulates every (angle, level, N, run), then per sensor: low-pass each axis, take the
/// magnitude, drop the warm-up, normalize per (angle, level, sensor) group and cut windows.
/// Each group holds windows_per_class windows of every label. Deterministic per master_seed.
Dataset generate_dataset(const ExperimentPlan& plan, const DatasetScope& scope = {});

/// Windows whose provenance matches the level and sensor (all angles).
Dataset select(const Dataset& data, int level, SensorKind sensor);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Stratified window-level split: floor(alpha * N) training windows in total, every class
/// within one window of alpha times its count. Throws DataError when a class would leave a
/// side empty.
SplitIndices split_dataset(const std::vector<models::HazardLabel>& labels, double alpha, std::uint64_t seed);

/// Split by simulation run: inside each (angle, level, N) the runs are shuffled and the
/// first floor(alpha * runs) go to training, so no simulated record feeds both sides.
SplitIndices split_by_run(const Dataset& data, const ExperimentPlan& plan, std::uint64_t seed);

Dataset subset(const Dataset& data, const std::vector<std::size_t>& indices);

/// `<stem>.csv` (one window per row) and `<stem>.json` (manifest with plan, filter,
/// normalization and a CSV checksum), each written atomically.
void write_dataset(const Dataset& data, const ExperimentPlan& plan, const std::filesystem::path& csv_path);
Dataset read_dataset(const std::filesystem::path& csv_path);

}  // namespace magclimb::experiment
