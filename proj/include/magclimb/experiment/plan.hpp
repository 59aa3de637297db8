// The experimental protocol: which scenarios to simulate, how to preprocess them, and how
// to split and train.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "magclimb/dsp/butterworth.hpp"
#include "magclimb/dsp/normalize.hpp"
#include "magclimb/dynamics/simulator.hpp"
#include "magclimb/models/classifier.hpp"

namespace magclimb::experiment {

enum class SensorKind { Body, Rod };

inline constexpr SensorKind kAllSensors[] = {SensorKind::Body, SensorKind::Rod};

const char* to_string(SensorKind s);
SensorKind sensor_from_string(const std::string& name);

/// Throws ConfigError for counts outside {4, 5, 6}.
models::HazardLabel label_from_plate_count(int plate_count);

struct ExperimentPlan {
  std::vector<double> wall_angles_deg{55.0, 65.0};
  std::vector<int> excitation_levels{0, 1, 2, 3};
  std::vector<int> plate_counts{6, 5, 4};
  /// Windows per label inside each (angle, level, sensor) group.
  std::size_t windows_per_class = 200;
  /// Independent simulations per (angle, N); windows are spread evenly over them.
  std::size_t runs_per_scenario = 10;
  double split_ratio = 0.7;
  std::size_t runs = 5;  ///< repeated trainings per model
  std::uint64_t master_seed = 2024;

  std::size_t window_length = 128;
  std::size_t window_stride = 64;
  double warmup_s = 2.0;  ///< discarded head of every record (filter and body transients)
  int filter_order = 4;
  double cutoff_hz = 10.0;
  dsp::NormMode normalization = dsp::NormMode::MinMax;
  std::size_t magnitude_axes = 3;  ///< 3 = x,y,z; 2 = y,z only

  /// Slice used by the model comparison.
  SensorKind model_sensor = SensorKind::Rod;
  int model_level = 3;
  std::vector<models::ModelKind> models{std::begin(models::kAllModelKinds), std::end(models::kAllModelKinds)};

  /// Physical template; plate count, level, wall angle, seed and duration are set per run.
  dynamics::SimScenario scenario;
  models::ClassifierOptions classifier;
};

/// Throws ConfigError naming the offending field.
void validate(const ExperimentPlan& plan);

dsp::FilterSpec filter_spec(const ExperimentPlan& plan);
std::vector<std::string> magnitude_axis_names(const ExperimentPlan& plan, SensorKind sensor);

/// Windows taken from each simulation: ceil(windows_per_class / runs_per_scenario).
std::size_t windows_per_run(const ExperimentPlan& plan);
/// Samples simulated per run, warm-up included.
std::size_t samples_per_run(const ExperimentPlan& plan);

/// Simulation seed for one (angle, N, run). It does not depend on the excitation level,
/// so every level of a run shares the same ambient and sensor noise realization.
std::uint64_t simulation_seed(const ExperimentPlan& plan, std::size_t angle_index, int plate_count, std::size_t run);

dynamics::SimScenario scenario_for(const ExperimentPlan& plan, std::size_t angle_index, int level, int plate_count,
                                   std::size_t run);

nlohmann::json to_json(const ExperimentPlan& plan);
/// Unknown keys are rejected; missing keys keep the defaults.
ExperimentPlan plan_from_json(const nlohmann::json& j, const ExperimentPlan& defaults = {});
ExperimentPlan load_plan(const std::string& path);

}  // namespace magclimb::experiment
