#include "magclimb/experiment/comparison.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "magclimb/common/errors.hpp"
#include "magclimb/common/io.hpp"
#include "magclimb/dsp/segment.hpp"
#include "magclimb/quality/metrics.hpp"

namespace magclimb::experiment {

using models::ModelKind;

namespace {

void report(const Progress& p, const std::string& msg) {
  if (p) p(msg);
}

double value_or_nan(const std::optional<double>& v) {
  return v ? *v : std::numeric_limits<double>::quiet_NaN();
}

/// Runs fn(i) for i in [0, count) on up to `threads` workers and rethrows the first failure.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::mutex mu;
  std::size_t next = 0;
  std::exception_ptr failure;
  auto worker = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard lock(mu);
        if (next >= count || failure) return;
        i = next++;
      }
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(threads, count); ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<std::vector<double>> values_of(const Dataset& d) {
  std::vector<std::vector<double>> out;
  out.reserve(d.size());
  for (const auto& w : d.windows) out.push_back(w.values);
  return out;
}

std::vector<models::HazardLabel> labels_of(const Dataset& d) {
  std::vector<models::HazardLabel> out;
  out.reserve(d.size());
  for (const auto& w : d.windows) out.push_back(w.label);
  return out;
}

}  // namespace

std::vector<SensorQuality> sensor_quality_grid(const ExperimentPlan& plan) {
  validate(plan);
  const auto warm = static_cast<std::size_t>(std::ceil(plan.warmup_s * plan.scenario.sample_rate_hz));
  std::vector<SensorQuality> grid;
  for (int level : plan.excitation_levels) {
    SensorQuality cells[2];
    for (auto s : kAllSensors) {
      cells[static_cast<int>(s)].level = level;
      cells[static_cast<int>(s)].sensor = s;
    }
    for (std::size_t ai = 0; ai < plan.wall_angles_deg.size(); ++ai) {
      for (int n : plan.plate_counts) {
        for (std::size_t run = 0; run < plan.runs_per_scenario; ++run) {
          const auto frame = dynamics::simulate_response(scenario_for(plan, ai, level, n, run));
          for (auto s : kAllSensors) {
            auto mag = dsp::magnitude_channel(frame, magnitude_axis_names(plan, s));
            mag.erase(mag.begin(), mag.begin() + static_cast<std::ptrdiff_t>(warm));
            SignalFrame single(frame.sample_rate_hz(), mag.size());
            single.add_channel("magnitude", std::move(mag));
            const auto q = quality::quality_report(single).channels.front();
            auto& c = cells[static_cast<int>(s)];
            c.energy += q.energy;
            c.std += value_or_nan(q.std);
            c.excess_kurtosis += value_or_nan(q.excess_kurtosis);
            c.skewness += value_or_nan(q.skewness);
            c.spectral_centroid_hz += value_or_nan(q.spectral_centroid_hz);
            ++c.records;
          }
        }
      }
    }
    for (auto& c : cells) {
      const double k = static_cast<double>(c.records);
      c.energy /= k;
      c.std /= k;
      c.excess_kurtosis /= k;
      c.skewness /= k;
      c.spectral_centroid_hz /= k;
      grid.push_back(c);
    }
  }
  return grid;
}

SensorComparisonReport compare_sensors(const ExperimentPlan& plan, const Progress& progress) {
  const auto quality = sensor_quality_grid(plan);
  SensorComparisonReport out;
  for (const auto& q : quality) {
    const Dataset data = generate_dataset(plan, {{q.level}, {q.sensor}});
    const auto split = split_by_run(data, plan, plan.master_seed);
    const auto train = subset(data, split.train);
    const auto test = subset(data, split.test);
    auto clf = models::make_classifier(ModelKind::IcnnLstm, plan.classifier, plan.window_length);
    clf->fit(train.window_set(), plan.master_seed);
    SensorCell cell;
    cell.quality = q;
    cell.train_count = train.size();
    cell.test_count = test.size();
    cell.report = models::make_report(labels_of(test), clf->predict(values_of(test)));
    cell.accuracy = cell.report.accuracy;
    report(progress, "level " + std::to_string(q.level) + " " + to_string(q.sensor) + ": accuracy " +
                         std::to_string(cell.accuracy));
    out.cells.push_back(std::move(cell));
  }
  return out;
}

PreparedData prepare_model_data(const ExperimentPlan& plan) {
  const Dataset data = generate_dataset(plan, {{plan.model_level}, {plan.model_sensor}});
  const auto split = split_by_run(data, plan, plan.master_seed);
  return {subset(data, split.train), subset(data, split.test)};
}

const ModelSummary& ModelComparisonReport::summary(ModelKind kind) const {
  for (const auto& s : summaries) {
    if (s.model == kind) return s;
  }
  throw LookupError(std::string("no summary for model ") + models::to_string(kind));
}

ModelComparisonReport compare_models(const ExperimentPlan& plan, const std::vector<ModelKind>& kinds,
                                     std::size_t threads, const Progress& progress) {
  validate(plan);
  return compare_models(prepare_model_data(plan), plan, kinds, threads, progress);
}

ModelComparisonReport compare_models(const PreparedData& data, const ExperimentPlan& plan,
                                     const std::vector<ModelKind>& kinds, std::size_t threads,
                                     const Progress& progress) {
  if (kinds.empty()) throw ConfigError("no models to compare");
  const auto train_set = data.train.window_set();
  const auto test_windows = values_of(data.test);
  const auto test_labels = labels_of(data.test);

  ModelComparisonReport out;
  out.train_count = data.train.size();
  out.test_count = data.test.size();
  out.runs.resize(kinds.size() * plan.runs);
  std::mutex log_mu;
  parallel_for(out.runs.size(), threads, [&](std::size_t i) {
    ModelRun r;
    r.model = kinds[i / plan.runs];
    r.run = i % plan.runs;
    r.seed = plan.master_seed + r.run;
    auto clf = models::make_classifier(r.model, plan.classifier, plan.window_length);
    r.history = clf->fit(train_set, r.seed);
    r.report = models::make_report(test_labels, clf->predict(test_windows));
    if (progress) {
      std::lock_guard lock(log_mu);
      progress(std::string(models::to_string(r.model)) + " run " + std::to_string(r.run) + ": accuracy " +
               std::to_string(r.report.accuracy));
    }
    out.runs[i] = std::move(r);
  });

  for (std::size_t k = 0; k < kinds.size(); ++k) {
    ModelSummary s;
    s.model = kinds[k];
    s.runs = plan.runs;
    double best = -1.0;
    for (std::size_t r = 0; r < plan.runs; ++r) {
      const auto& run = out.runs[k * plan.runs + r];
      s.mean_accuracy += run.report.accuracy;
      if (run.report.accuracy > best) {
        best = run.report.accuracy;
        s.best_run = r;
        s.best_confusion = run.report.confusion;
      }
    }
    s.mean_accuracy /= static_cast<double>(plan.runs);
    double var = 0.0;
    for (std::size_t r = 0; r < plan.runs; ++r) {
      const double d = out.runs[k * plan.runs + r].report.accuracy - s.mean_accuracy;
      var += d * d;
    }
    s.std_accuracy = std::sqrt(var / static_cast<double>(plan.runs));
    out.summaries.push_back(s);
  }
  return out;
}

nlohmann::json to_json(const SensorQuality& q) {
  auto num = [](double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); };
  return {{"level", q.level},
          {"sensor", to_string(q.sensor)},
          {"records", q.records},
          {"energy", num(q.energy)},
          {"std", num(q.std)},
          {"excess_kurtosis", num(q.excess_kurtosis)},
          {"skewness", num(q.skewness)},
          {"spectral_centroid_hz", num(q.spectral_centroid_hz)}};
}

nlohmann::json to_json(const SensorComparisonReport& r) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : r.cells) {
    cells.push_back({{"level", c.quality.level},
                     {"sensor", to_string(c.quality.sensor)},
                     {"accuracy", c.accuracy},
                     {"train_count", c.train_count},
                     {"test_count", c.test_count},
                     {"quality", to_json(c.quality)},
                     {"evaluation", models::to_json(c.report)}});
  }
  return {{"cells", cells}};
}

std::string sensor_grid_csv(const SensorComparisonReport& r) {
  std::string csv = "level,sensor,accuracy,energy,std,excess_kurtosis,skewness,spectral_centroid_hz\n";
  for (const auto& c : r.cells) {
    const auto& q = c.quality;
    csv += std::to_string(q.level) + ',' + to_string(q.sensor) + ',' + io::format_double(c.accuracy) + ',' +
           io::format_double(q.energy) + ',' + io::format_double(q.std) + ',' + io::format_double(q.excess_kurtosis) +
           ',' + io::format_double(q.skewness) + ',' + io::format_double(q.spectral_centroid_hz) + '\n';
  }
  return csv;
}

nlohmann::json to_json(const ModelComparisonReport& r) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& run : r.runs) {
    nlohmann::json j = {{"model", models::to_string(run.model)},
                        {"run", run.run},
                        {"seed", run.seed},
                        {"accuracy", run.report.accuracy},
                        {"evaluation", models::to_json(run.report)}};
    if (run.history) j["history"] = models::to_json(*run.history);
    runs.push_back(std::move(j));
  }
  nlohmann::json summaries = nlohmann::json::array();
  for (const auto& s : r.summaries) {
    summaries.push_back({{"model", models::to_string(s.model)},
                         {"runs", s.runs},
                         {"mean_accuracy", s.mean_accuracy},
                         {"std_accuracy", s.std_accuracy},
                         {"best_run", s.best_run},
                         {"best_confusion", s.best_confusion}});
  }
  return {{"train_count", r.train_count}, {"test_count", r.test_count}, {"runs", runs}, {"summaries", summaries}};
}

std::string model_runs_csv(const ModelComparisonReport& r) {
  std::string csv = "model,run,seed,accuracy\n";
  for (const auto& run : r.runs) {
    csv += std::string(models::to_string(run.model)) + ',' + std::to_string(run.run) + ',' +
           std::to_string(run.seed) + ',' + io::format_double(run.report.accuracy) + '\n';
  }
  return csv;
}

std::string model_summary_csv(const ModelComparisonReport& r) {
  std::string csv = "model,runs,mean_accuracy,std_accuracy,best_run\n";
  for (const auto& s : r.summaries) {
    csv += std::string(models::to_string(s.model)) + ',' + std::to_string(s.runs) + ',' +
           io::format_double(s.mean_accuracy) + ',' + io::format_double(s.std_accuracy) + ',' +
           std::to_string(s.best_run) + '\n';
  }
  return csv;
}

}  // namespace magclimb::experiment
