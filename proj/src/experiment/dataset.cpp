#include "magclimb/experiment/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

#include "magclimb/common/errors.hpp"
#include "magclimb/common/io.hpp"
#include "magclimb/common/json_fields.hpp"
#include "magclimb/common/rng.hpp"
#include "magclimb/dsp/butterworth.hpp"
#include "magclimb/dsp/segment.hpp"

namespace magclimb::experiment {

using models::HazardLabel;

std::string Provenance::scenario_id() const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "a%g_l%d_n%d_r%02zu", angle_deg, level, plate_count, run);
  return buf;
}

models::WindowSet Dataset::window_set() const {
  models::WindowSet set;
  set.windows.reserve(windows.size());
  set.labels.reserve(windows.size());
  for (const auto& w : windows) {
    set.windows.push_back(w.values);
    set.labels.push_back(w.label);
  }
  return set;
}

namespace {

template <typename T>
bool in_scope(const std::vector<T>& scope, T v) {
  return scope.empty() || std::find(scope.begin(), scope.end(), v) != scope.end();
}

void shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
    std::swap(v[i - 1], v[j]);
  }
}

/// Filtered magnitude of one sensor with the warm-up removed.
std::vector<double> preprocess(const SignalFrame& frame, const ExperimentPlan& plan, SensorKind sensor,
                               const dsp::FilterCoeffs& coeffs, std::size_t warm) {
  SignalFrame filtered(frame.sample_rate_hz(), frame.length());
  for (const auto& axis : magnitude_axis_names(plan, sensor)) {
    filtered.add_channel(axis, dsp::filter_signal(coeffs, frame.channel(axis)));
  }
  auto mag = dsp::magnitude_channel(filtered, magnitude_axis_names(plan, sensor));
  mag.erase(mag.begin(), mag.begin() + static_cast<std::ptrdiff_t>(warm));
  return mag;
}

}  // namespace

Dataset generate_dataset(const ExperimentPlan& plan, const DatasetScope& scope) {
  validate(plan);
  const auto coeffs = dsp::design_butterworth(filter_spec(plan));
  const auto warm = static_cast<std::size_t>(std::ceil(plan.warmup_s * plan.scenario.sample_rate_hz));
  const std::size_t per_run = windows_per_run(plan);

  Dataset data;
  for (std::size_t ai = 0; ai < plan.wall_angles_deg.size(); ++ai) {
    for (int level : plan.excitation_levels) {
      if (!in_scope(scope.levels, level)) continue;
      // records[sensor][n index][run]
      std::map<SensorKind, std::vector<std::vector<std::vector<double>>>> records;
      std::vector<std::vector<std::uint64_t>> seeds(plan.plate_counts.size());
      for (std::size_t ni = 0; ni < plan.plate_counts.size(); ++ni) {
        for (std::size_t run = 0; run < plan.runs_per_scenario; ++run) {
          const auto scn = scenario_for(plan, ai, level, plan.plate_counts[ni], run);
          seeds[ni].push_back(scn.seed);
          const auto frame = dynamics::simulate_response(scn);
          for (auto sensor : kAllSensors) {
            if (!in_scope(scope.sensors, sensor)) continue;
            auto& slot = records[sensor];
            slot.resize(plan.plate_counts.size());
            slot[ni].push_back(preprocess(frame, plan, sensor, coeffs, warm));
          }
        }
      }
      for (auto sensor : kAllSensors) {
        if (!in_scope(scope.sensors, sensor)) continue;
        const auto& group = records.at(sensor);
        std::vector<double> pooled;
        for (const auto& per_n : group) {
          for (const auto& rec : per_n) pooled.insert(pooled.end(), rec.begin(), rec.end());
        }
        const auto params = plan.normalization == dsp::NormMode::MinMax ? dsp::fit_minmax(pooled)
                                                                        : dsp::fit_zscore(pooled);
        data.norms.push_back({plan.wall_angles_deg[ai], level, sensor, params});
        for (std::size_t ni = 0; ni < group.size(); ++ni) {
          const int n = plan.plate_counts[ni];
          std::size_t taken = 0;
          for (std::size_t run = 0; run < group[ni].size() && taken < plan.windows_per_class; ++run) {
            const auto norm = dsp::apply(params, group[ni][run]);
            auto windows = dsp::window_segments(norm, plan.window_length, plan.window_stride);
            for (std::size_t w = 0; w < std::min(per_run, windows.size()) && taken < plan.windows_per_class; ++w) {
              LabeledWindow lw;
              lw.values = std::move(windows[w]);
              lw.label = label_from_plate_count(n);
              lw.provenance = {plan.wall_angles_deg[ai], level, n, sensor, run, seeds[ni][run], w * plan.window_stride};
              data.windows.push_back(std::move(lw));
              ++taken;
            }
          }
          if (taken != plan.windows_per_class) {
            throw DataError("group produced " + std::to_string(taken) + " windows for N=" + std::to_string(n) +
                            ", expected " + std::to_string(plan.windows_per_class));
          }
        }
      }
    }
  }
  return data;
}

Dataset select(const Dataset& data, int level, SensorKind sensor) {
  Dataset out;
  for (const auto& w : data.windows) {
    if (w.provenance.level == level && w.provenance.sensor == sensor) out.windows.push_back(w);
  }
  for (const auto& g : data.norms) {
    if (g.level == level && g.sensor == sensor) out.norms.push_back(g);
  }
  return out;
}

SplitIndices split_dataset(const std::vector<HazardLabel>& labels, double alpha, std::uint64_t seed) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("split ratio must lie in (0, 1)");
  const std::size_t n = labels.size();
  const auto target = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(n)));

  std::vector<std::vector<std::size_t>> members(models::kClassCount);
  for (std::size_t i = 0; i < n; ++i) members[models::index_of(labels[i])].push_back(i);

  // Per-class quotas by largest remainder so they add up to the global target.
  std::vector<std::size_t> quota(models::kClassCount);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < models::kClassCount; ++c) {
    const double exact = alpha * static_cast<double>(members[c].size());
    quota[c] = static_cast<std::size_t>(std::floor(exact));
    assigned += quota[c];
    if (!members[c].empty()) remainders.emplace_back(exact - std::floor(exact), c);
  }
  std::stable_sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  // A class never receives an extra slot that would empty its test side.
  for (std::size_t r = 0; assigned < target && r < remainders.size(); ++r) {
    const std::size_t c = remainders[r].second;
    if (quota[c] + 1 < members[c].size()) {
      ++quota[c];
      ++assigned;
    }
  }

  Rng rng = make_rng(seed, 0x5B17);
  SplitIndices out;
  for (std::size_t c = 0; c < models::kClassCount; ++c) {
    if (members[c].empty()) continue;
    if (quota[c] == 0 || quota[c] == members[c].size()) {
      throw DataError(std::string("class ") + models::to_string(models::label_from_index(static_cast<long long>(c))) +
                      " has too few samples to appear on both sides of the split");
    }
    shuffle(members[c], rng);
    out.train.insert(out.train.end(), members[c].begin(), members[c].begin() + static_cast<std::ptrdiff_t>(quota[c]));
    out.test.insert(out.test.end(), members[c].begin() + static_cast<std::ptrdiff_t>(quota[c]), members[c].end());
  }
  if (assigned != target) throw DataError("split cannot reach floor(alpha * N) training samples with every class on both sides");
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

SplitIndices split_by_run(const Dataset& data, const ExperimentPlan& plan, std::uint64_t seed) {
  using Key = std::tuple<double, int, int>;
  std::map<Key, std::vector<std::size_t>> runs_of;
  for (const auto& w : data.windows) {
    auto& runs = runs_of[{w.provenance.angle_deg, w.provenance.level, w.provenance.plate_count}];
    if (std::find(runs.begin(), runs.end(), w.provenance.run) == runs.end()) runs.push_back(w.provenance.run);
  }
  std::map<Key, std::vector<std::size_t>> train_runs;
  std::uint64_t stream = 0;
  for (auto& [key, runs] : runs_of) {
    std::sort(runs.begin(), runs.end());
    const auto take = static_cast<std::size_t>(std::floor(plan.split_ratio * static_cast<double>(runs.size())));
    if (take == 0 || take == runs.size()) {
      throw DataError("scenario group needs simulation runs on both sides of the split");
    }
    Rng rng = make_rng(seed, 0x7200 + stream++);
    shuffle(runs, rng);
    train_runs[key].assign(runs.begin(), runs.begin() + static_cast<std::ptrdiff_t>(take));
  }
  SplitIndices out;
  for (std::size_t i = 0; i < data.windows.size(); ++i) {
    const auto& p = data.windows[i].provenance;
    const auto& tr = train_runs[{p.angle_deg, p.level, p.plate_count}];
    (std::find(tr.begin(), tr.end(), p.run) != tr.end() ? out.train : out.test).push_back(i);
  }
  return out;
}

Dataset subset(const Dataset& data, const std::vector<std::size_t>& indices) {
  Dataset out;
  out.norms = data.norms;
  out.windows.reserve(indices.size());
  for (auto i : indices) out.windows.push_back(data.windows.at(i));
  return out;
}

namespace {

constexpr const char* kFixedColumns[] = {"label", "sensor", "angle_deg", "level", "plate_count", "run", "sim_seed", "offset"};

}  // namespace

void write_dataset(const Dataset& data, const ExperimentPlan& plan, const std::filesystem::path& csv_path) {
  const std::size_t len = data.windows.empty() ? 0 : data.windows.front().values.size();
  std::string csv;
  for (auto c : kFixedColumns) {
    csv += c;
    csv += ',';
  }
  for (std::size_t i = 0; i < len; ++i) csv += "x" + std::to_string(i) + (i + 1 < len ? "," : "");
  csv += '\n';
  for (const auto& w : data.windows) {
    const auto& p = w.provenance;
    csv += std::string(models::to_string(w.label)) + ',' + to_string(p.sensor) + ',' + io::format_double(p.angle_deg) +
           ',' + std::to_string(p.level) + ',' + std::to_string(p.plate_count) + ',' + std::to_string(p.run) + ',' +
           std::to_string(p.sim_seed) + ',' + std::to_string(p.offset);
    for (double v : w.values) {
      csv += ',';
      csv += io::format_double(v);
    }
    csv += '\n';
  }
  io::write_text_atomic(csv_path, csv);

  nlohmann::json norms = nlohmann::json::array();
  for (const auto& g : data.norms) {
    norms.push_back({{"angle_deg", g.angle_deg},
                     {"level", g.level},
                     {"sensor", to_string(g.sensor)},
                     {"params", dsp::to_json(g.params)}});
  }
  const auto bytes = std::span(reinterpret_cast<const std::uint8_t*>(csv.data()), csv.size());
  const nlohmann::json manifest = {{"format", "magclimb.windows"},
                                   {"version", 1},
                                   {"csv", csv_path.filename().string()},
                                   {"csv_fnv1a64", io::hex64(io::fnv1a64(bytes))},
                                   {"window_count", data.windows.size()},
                                   {"window_length", plan.window_length},
                                   {"window_stride", plan.window_stride},
                                   {"filter", dsp::to_json(filter_spec(plan))},
                                   {"normalization", norms},
                                   {"plan", to_json(plan)}};
  auto manifest_path = csv_path;
  manifest_path.replace_extension(".json");
  io::write_text_atomic(manifest_path, manifest.dump(2) + "\n");
}

Dataset read_dataset(const std::filesystem::path& csv_path) {
  auto manifest_path = csv_path;
  manifest_path.replace_extension(".json");
  const auto manifest = json_fields::load_file(manifest_path.string());
  const std::string text = io::read_text(csv_path);
  const auto bytes = std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size());
  if (manifest.value("csv_fnv1a64", "") != io::hex64(io::fnv1a64(bytes))) {
    throw DataError(csv_path.string() + ": checksum does not match its manifest");
  }
  Dataset data;
  try {
    for (const auto& g : manifest.at("normalization")) {
      data.norms.push_back({g.at("angle_deg").get<double>(), g.at("level").get<int>(),
                            sensor_from_string(g.at("sensor").get<std::string>()),
                            dsp::norm_params_from_json(g.at("params"))});
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(manifest_path.string() + ": " + e.what());
  }
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  const std::size_t fixed = std::size(kFixedColumns);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = io::split(line, ',');
    if (cells.size() < fixed + 1) throw DataError(csv_path.string() + ":" + std::to_string(line_no) + ": too few columns");
    const std::string where = csv_path.string() + ":" + std::to_string(line_no);
    LabeledWindow w;
    w.label = models::label_from_string(std::string(cells[0]));
    auto& p = w.provenance;
    p.sensor = sensor_from_string(std::string(cells[1]));
    p.angle_deg = io::parse_double(cells[2], where);
    p.level = static_cast<int>(io::parse_double(cells[3], where));
    p.plate_count = static_cast<int>(io::parse_double(cells[4], where));
    p.run = static_cast<std::size_t>(io::parse_double(cells[5], where));
    p.sim_seed = std::stoull(std::string(cells[6]));
    p.offset = static_cast<std::size_t>(io::parse_double(cells[7], where));
    for (std::size_t i = fixed; i < cells.size(); ++i) w.values.push_back(io::parse_double(cells[i], where));
    data.windows.push_back(std::move(w));
  }
  if (data.windows.size() != manifest.value("window_count", std::size_t{0})) {
    throw DataError(csv_path.string() + ": window count differs from its manifest");
  }
  return data;
}

}  // namespace magclimb::experiment
