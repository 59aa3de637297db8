// Sensor comparison across excitation levels and the repeated-run model comparison.
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "magclimb/experiment/dataset.hpp"
#include "magclimb/experiment/plan.hpp"
#include "magclimb/models/evaluation.hpp"

namespace magclimb::experiment {

using Progress = std::function<void(const std::string&)>;

/// Signal-quality metrics of one sensor at one level, averaged over every simulated record
/// (raw magnitude channel after the warm-up). Undefined metrics average to NaN.
struct SensorQuality {
  int level = 0;
  SensorKind sensor = SensorKind::Body;
  std::size_t records = 0;
  double energy = 0.0;
  double std = 0.0;
  double excess_kurtosis = 0.0;
  double skewness = 0.0;
  double spectral_centroid_hz = 0.0;
};

std::vector<SensorQuality> sensor_quality_grid(const ExperimentPlan& plan);

struct SensorCell {
  SensorQuality quality;
  double accuracy = 0.0;  ///< ICNN-LSTM test accuracy
  std::size_t train_count = 0;
  std::size_t test_count = 0;
  models::EvalReport report;
};

struct SensorComparisonReport {
  std::vector<SensorCell> cells;  ///< level-major, body before rod
};

/// One ICNN-LSTM per (level, sensor), trained with seed master_seed on a run-disjoint split.
SensorComparisonReport compare_sensors(const ExperimentPlan& plan, const Progress& progress = {});

/// The plan's model slice (model_level, model_sensor, all angles) split by simulation run
/// with seed master_seed.
struct PreparedData {
  Dataset train;
  Dataset test;
};

PreparedData prepare_model_data(const ExperimentPlan& plan);

struct ModelRun {
  models::ModelKind model = models::ModelKind::IcnnLstm;
  std::size_t run = 0;
  std::uint64_t seed = 0;
  models::EvalReport report;
  std::optional<models::TrainHistory> history;
};

struct ModelSummary {
  models::ModelKind model = models::ModelKind::IcnnLstm;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  ///< population std over the runs
  std::size_t runs = 0;
  std::size_t best_run = 0;
  models::ConfusionMatrix best_confusion{};
};

struct ModelComparisonReport {
  std::size_t train_count = 0;
  std::size_t test_count = 0;
  std::vector<ModelRun> runs;  ///< ordered by (model, run)
  std::vector<ModelSummary> summaries;

  const ModelSummary& summary(models::ModelKind kind) const;
};

/// Trains every model `plan.runs` times with seeds master_seed + run on one shared split.
/// `threads` > 1 trains independent runs concurrently; results do not depend on it.
ModelComparisonReport compare_models(const ExperimentPlan& plan, const std::vector<models::ModelKind>& kinds,
                                     std::size_t threads = 1, const Progress& progress = {});

ModelComparisonReport compare_models(const PreparedData& data, const ExperimentPlan& plan,
                                     const std::vector<models::ModelKind>& kinds, std::size_t threads = 1,
                                     const Progress& progress = {});

nlohmann::json to_json(const SensorQuality& q);
nlohmann::json to_json(const SensorComparisonReport& r);
/// level,sensor,accuracy,energy,std,excess_kurtosis,skewness,spectral_centroid_hz
std::string sensor_grid_csv(const SensorComparisonReport& r);

nlohmann::json to_json(const ModelComparisonReport& r);
/// model,run,seed,accuracy
std::string model_runs_csv(const ModelComparisonReport& r);
/// model,runs,mean_accuracy,std_accuracy,best_run
std::string model_summary_csv(const ModelComparisonReport& r);

}  // namespace magclimb::experiment
