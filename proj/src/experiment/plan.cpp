#include "magclimb/experiment/plan.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "magclimb/common/errors.hpp"
#include "magclimb/common/json_fields.hpp"
#include "magclimb/common/rng.hpp"

namespace magclimb::experiment {

using json = nlohmann::json;

const char* to_string(SensorKind s) { return s == SensorKind::Body ? "body" : "rod"; }

SensorKind sensor_from_string(const std::string& name) {
  if (name == "body") return SensorKind::Body;
  if (name == "rod") return SensorKind::Rod;
  throw ConfigError("unknown sensor '" + name + "' (expected body or rod)");
}

models::HazardLabel label_from_plate_count(int n) {
  switch (n) {
    case 6: return models::HazardLabel::Safe;
    case 5: return models::HazardLabel::PotentialHazard;
    case 4: return models::HazardLabel::HazardOccurred;
    default:
      throw ConfigError("plate count " + std::to_string(n) + " is outside the protocol (expected 4, 5 or 6)");
  }
}

void validate(const ExperimentPlan& p) {
  if (p.wall_angles_deg.empty()) throw ConfigError("plan.wall_angles_deg must not be empty");
  for (double a : p.wall_angles_deg) {
    if (!(a >= 0.0 && a <= 90.0)) throw ConfigError("plan.wall_angles_deg entries must lie in [0, 90]");
  }
  if (p.excitation_levels.empty()) throw ConfigError("plan.excitation_levels must not be empty");
  for (int l : p.excitation_levels) {
    if (l < 0 || l > 3) throw ConfigError("plan.excitation_levels entries must lie in 0..3");
  }
  if (p.plate_counts.empty()) throw ConfigError("plan.plate_counts must not be empty");
  for (int n : p.plate_counts) label_from_plate_count(n);
  auto sorted = p.plate_counts;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ConfigError("plan.plate_counts must not repeat");
  }
  if (p.windows_per_class == 0) throw ConfigError("plan.windows_per_class must be >= 1");
  if (!(p.split_ratio > 0.0 && p.split_ratio < 1.0)) throw ConfigError("plan.split_ratio must lie in (0, 1)");
  const auto train_runs = static_cast<std::size_t>(std::floor(p.split_ratio * static_cast<double>(p.runs_per_scenario)));
  if (train_runs == 0 || train_runs == p.runs_per_scenario) {
    throw ConfigError("plan.runs_per_scenario must leave at least one simulation run on each side of the split");
  }
  if (p.runs == 0) throw ConfigError("plan.runs must be >= 1");
  if (p.window_length == 0 || p.window_stride == 0) throw ConfigError("plan window length and stride must be >= 1");
  if (!(p.warmup_s >= 0.0)) throw ConfigError("plan.warmup_s must be >= 0");
  if (p.magnitude_axes != 2 && p.magnitude_axes != 3) throw ConfigError("plan.magnitude_axes must be 2 or 3");
  if (p.model_level < 0 || p.model_level > 3) throw ConfigError("plan.model_level must lie in 0..3");
  if (std::find(p.excitation_levels.begin(), p.excitation_levels.end(), p.model_level) == p.excitation_levels.end()) {
    throw ConfigError("plan.model_level must be one of plan.excitation_levels");
  }
  if (p.models.empty()) throw ConfigError("plan.models must not be empty");
  dsp::validate(filter_spec(p));
  models::validate(p.classifier.train);
}

dsp::FilterSpec filter_spec(const ExperimentPlan& p) {
  return {p.filter_order, p.cutoff_hz, p.scenario.sample_rate_hz};
}

std::vector<std::string> magnitude_axis_names(const ExperimentPlan& p, SensorKind sensor) {
  const auto& axes = sensor == SensorKind::Body ? dynamics::kBodyAxes : dynamics::kRodAxes;
  if (p.magnitude_axes == 2) return {axes[1], axes[2]};
  return {axes.begin(), axes.end()};
}

std::size_t windows_per_run(const ExperimentPlan& p) {
  return (p.windows_per_class + p.runs_per_scenario - 1) / p.runs_per_scenario;
}

std::size_t samples_per_run(const ExperimentPlan& p) {
  const auto warm = static_cast<std::size_t>(std::ceil(p.warmup_s * p.scenario.sample_rate_hz));
  return warm + p.window_length + (windows_per_run(p) - 1) * p.window_stride;
}

std::uint64_t simulation_seed(const ExperimentPlan& p, std::size_t angle_index, int plate_count, std::size_t run) {
  const std::uint64_t stream = (static_cast<std::uint64_t>(angle_index) << 40) ^
                               (static_cast<std::uint64_t>(plate_count) << 32) ^ static_cast<std::uint64_t>(run);
  return derive_seed(p.master_seed, stream);
}

dynamics::SimScenario scenario_for(const ExperimentPlan& p, std::size_t angle_index, int level, int plate_count,
                                   std::size_t run) {
  dynamics::SimScenario s = p.scenario;
  s.adhesion.plate_count = plate_count;
  s.excitation_level = level;
  s.climb.wall_angle = p.wall_angles_deg.at(angle_index) * std::numbers::pi / 180.0;
  s.seed = simulation_seed(p, angle_index, plate_count, run);
  s.duration_s = static_cast<double>(samples_per_run(p)) / s.sample_rate_hz;
  return s;
}

namespace {

json classifier_json(const models::ClassifierOptions& o) {
  return {{"icnn_lstm", models::to_json(o.icnn)},
          {"train", models::to_json(o.train)},
          {"knn_k", o.knn_k},
          {"rf_trees", o.rf.trees},
          {"baseline_hidden", o.lstm.hidden},
          {"bp_hidden_units", o.bp.hidden_units},
          {"rnn_truncation", o.rnn.truncation}};
}

models::ClassifierOptions classifier_from_json(const json& j, const models::ClassifierOptions& d) {
  using json_fields::get_or;
  json_fields::expect_object(j, "plan.classifier");
  json_fields::reject_unknown(j, "plan.classifier.",
                              {"icnn_lstm", "train", "knn_k", "rf_trees", "baseline_hidden", "bp_hidden_units",
                               "rnn_truncation"});
  models::ClassifierOptions o = d;
  if (j.contains("icnn_lstm")) o.icnn = models::icnn_config_from_json(j.at("icnn_lstm"), d.icnn);
  if (j.contains("train")) o.train = models::train_config_from_json(j.at("train"), d.train);
  o.knn_k = get_or<std::size_t>(j, "plan.classifier.", "knn_k", d.knn_k);
  o.rf.trees = get_or<std::size_t>(j, "plan.classifier.", "rf_trees", d.rf.trees);
  const auto hidden = get_or<std::size_t>(j, "plan.classifier.", "baseline_hidden", d.lstm.hidden);
  o.lstm.hidden = o.rnn.hidden = hidden;
  o.lstm.dense_units = o.rnn.dense_units = hidden;
  o.bp.hidden_units = get_or<std::size_t>(j, "plan.classifier.", "bp_hidden_units", d.bp.hidden_units);
  o.rnn.truncation = get_or<std::size_t>(j, "plan.classifier.", "rnn_truncation", d.rnn.truncation);
  if (o.knn_k == 0) throw ConfigError("plan.classifier.knn_k must be >= 1");
  if (o.rf.trees == 0) throw ConfigError("plan.classifier.rf_trees must be >= 1");
  return o;
}

}  // namespace

json to_json(const ExperimentPlan& p) {
  json model_names = json::array();
  for (auto m : p.models) model_names.push_back(models::to_string(m));
  return {{"wall_angles_deg", p.wall_angles_deg},
          {"excitation_levels", p.excitation_levels},
          {"plate_counts", p.plate_counts},
          {"windows_per_class", p.windows_per_class},
          {"runs_per_scenario", p.runs_per_scenario},
          {"split_ratio", p.split_ratio},
          {"runs", p.runs},
          {"master_seed", p.master_seed},
          {"window_length", p.window_length},
          {"window_stride", p.window_stride},
          {"warmup_s", p.warmup_s},
          {"filter_order", p.filter_order},
          {"cutoff_hz", p.cutoff_hz},
          {"normalization", dsp::to_string(p.normalization)},
          {"magnitude_axes", p.magnitude_axes},
          {"model_sensor", to_string(p.model_sensor)},
          {"model_level", p.model_level},
          {"models", model_names},
          {"scenario", dynamics::to_json(p.scenario)},
          {"classifier", classifier_json(p.classifier)}};
}

ExperimentPlan plan_from_json(const json& j, const ExperimentPlan& d) {
  using json_fields::get_or;
  json_fields::expect_object(j, "plan");
  json_fields::reject_unknown(
      j, "plan.",
      {"wall_angles_deg", "excitation_levels", "plate_counts", "windows_per_class", "runs_per_scenario",
       "split_ratio", "runs", "master_seed", "window_length", "window_stride", "warmup_s", "filter_order",
       "cutoff_hz", "normalization", "magnitude_axes", "model_sensor", "model_level", "models", "scenario",
       "classifier"});
  ExperimentPlan p = d;
  p.wall_angles_deg = get_or<std::vector<double>>(j, "plan.", "wall_angles_deg", d.wall_angles_deg);
  p.excitation_levels = get_or<std::vector<int>>(j, "plan.", "excitation_levels", d.excitation_levels);
  p.plate_counts = get_or<std::vector<int>>(j, "plan.", "plate_counts", d.plate_counts);
  p.windows_per_class = get_or<std::size_t>(j, "plan.", "windows_per_class", d.windows_per_class);
  p.runs_per_scenario = get_or<std::size_t>(j, "plan.", "runs_per_scenario", d.runs_per_scenario);
  p.split_ratio = get_or<double>(j, "plan.", "split_ratio", d.split_ratio);
  p.runs = get_or<std::size_t>(j, "plan.", "runs", d.runs);
  p.master_seed = get_or<std::uint64_t>(j, "plan.", "master_seed", d.master_seed);
  p.window_length = get_or<std::size_t>(j, "plan.", "window_length", d.window_length);
  p.window_stride = get_or<std::size_t>(j, "plan.", "window_stride", d.window_stride);
  p.warmup_s = get_or<double>(j, "plan.", "warmup_s", d.warmup_s);
  p.filter_order = get_or<int>(j, "plan.", "filter_order", d.filter_order);
  p.cutoff_hz = get_or<double>(j, "plan.", "cutoff_hz", d.cutoff_hz);
  if (j.contains("normalization")) {
    p.normalization = dsp::norm_mode_from_string(json_fields::require<std::string>(j, "plan.", "normalization"));
  }
  p.magnitude_axes = get_or<std::size_t>(j, "plan.", "magnitude_axes", d.magnitude_axes);
  if (j.contains("model_sensor")) {
    p.model_sensor = sensor_from_string(json_fields::require<std::string>(j, "plan.", "model_sensor"));
  }
  p.model_level = get_or<int>(j, "plan.", "model_level", d.model_level);
  if (j.contains("models")) {
    p.models.clear();
    for (const auto& name : json_fields::require<std::vector<std::string>>(j, "plan.", "models")) {
      p.models.push_back(models::model_kind_from_string(name));
    }
  }
  if (j.contains("scenario")) p.scenario = dynamics::scenario_from_json(j.at("scenario"), d.scenario);
  if (j.contains("classifier")) p.classifier = classifier_from_json(j.at("classifier"), d.classifier);
  validate(p);
  return p;
}

ExperimentPlan load_plan(const std::string& path) { return plan_from_json(json_fields::load_file(path)); }

}  // namespace magclimb::experiment
