#include "magclimb/cli/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "magclimb/common/errors.hpp"
#include "magclimb/common/io.hpp"
#include "magclimb/common/json_fields.hpp"
#include "magclimb/dynamics/rod.hpp"
#include "magclimb/dynamics/simulator.hpp"
#include "magclimb/experiment/comparison.hpp"
#include "magclimb/experiment/dataset.hpp"
#include "magclimb/quality/metrics.hpp"

#ifndef MAGCLIMB_VERSION
#define MAGCLIMB_VERSION "unknown"
#endif

namespace magclimb::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

constexpr const char* kManifestFormat = "magclimb.run";

json to_json(const RunManifest& m) {
  json artifacts = json::array();
  for (const auto& p : m.artifacts) {
    const auto bytes = io::read_bytes(p);
    artifacts.push_back({{"path", p.filename().string()}, {"bytes", bytes.size()}, {"fnv1a64", io::hex64(io::fnv1a64(bytes))}});
  }
  return {{"format", kManifestFormat},
          {"version", 1},
          {"command", m.command},
          {"tool_version", MAGCLIMB_VERSION},
          {"config", m.config},
          {"seeds", m.seeds},
          {"artifacts", artifacts},
          {"duration_s", m.duration_s}};
}

void write_manifest(const RunManifest& m, const fs::path& path) { io::write_text_atomic(path, to_json(m).dump(2) + "\n"); }

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> pool_window;
  std::optional<double> cutoff_hz;
  std::optional<std::size_t> epochs;
  std::vector<std::string> models;
  std::size_t threads = 1;
};

/// Seed precedence: --seed, then the config file, then MAGCLIMB_SEED, then the built-in default.
std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("MAGCLIMB_SEED");
  if (v == nullptr || *v == '\0') return std::nullopt;
  try {
    std::size_t used = 0;
    const auto s = std::stoull(v, &used);
    if (used != std::string(v).size()) throw std::invalid_argument("trailing characters");
    return s;
  } catch (const std::exception&) {
    throw ConfigError(std::string("MAGCLIMB_SEED='") + v + "' is not an unsigned integer");
  }
}

/// A config file, or a run manifest whose stored config replaces it.
json load_config(const std::string& path, const char* key) {
  json j = json_fields::load_file(path);
  if (j.is_object() && j.value("format", "") == kManifestFormat) {
    if (!j.contains("config") || !j["config"].contains(key)) {
      throw ConfigError(path + ": run manifest has no '" + key + "' config");
    }
    return j["config"];
  }
  return json{{key, j}};
}

struct ResolvedPlan {
  experiment::ExperimentPlan plan;
  std::string seed_source;
  std::optional<std::string> model;
};

ResolvedPlan resolve_plan(const std::string& path, const Overrides& o) {
  const json cfg = load_config(path, "plan");
  const json& pj = cfg.at("plan");
  ResolvedPlan r;
  r.plan = experiment::plan_from_json(pj);
  if (o.seed) {
    r.plan.master_seed = *o.seed;
    r.seed_source = "flag";
  } else if (pj.contains("master_seed")) {
    r.seed_source = "config";
  } else if (const auto s = env_seed()) {
    r.plan.master_seed = *s;
    r.seed_source = "MAGCLIMB_SEED";
  } else {
    r.seed_source = "default";
  }
  if (o.pool_window) r.plan.classifier.icnn.pool_window = *o.pool_window;
  if (o.cutoff_hz) r.plan.cutoff_hz = *o.cutoff_hz;
  if (o.epochs) r.plan.classifier.train.epochs = *o.epochs;
  if (!o.models.empty()) {
    r.plan.models.clear();
    for (const auto& m : o.models) r.plan.models.push_back(models::model_kind_from_string(m));
  }
  if (cfg.contains("model")) r.model = cfg["model"].get<std::string>();
  experiment::validate(r.plan);
  models::validate(r.plan.classifier.icnn);
  return r;
}

fs::path prepare_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
  return p;
}

fs::path sibling_manifest(const fs::path& out) {
  auto p = out;
  p.replace_extension(".manifest.json");
  return p;
}

void write_text(const fs::path& path, const std::string& text, RunManifest& m) {
  io::write_text_atomic(path, text);
  m.artifacts.push_back(path);
}

class Clock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// ------------------------------------------------------------------ commands

int cmd_simulate(const std::string& scenario_path, const std::string& out_path, const Overrides& o,
                 std::ostream& out) {
  Clock clock;
  const json cfg = load_config(scenario_path, "scenario");
  auto scn = dynamics::scenario_from_json(cfg.at("scenario"));
  std::string source = "config";
  if (o.seed) {
    scn.seed = *o.seed;
    source = "flag";
  } else if (!cfg.at("scenario").contains("seed")) {
    if (const auto s = env_seed()) {
      scn.seed = *s;
      source = "MAGCLIMB_SEED";
    } else {
      source = "default";
    }
  }
  const auto frame = dynamics::simulate_response(scn);
  const fs::path csv(out_path);
  if (csv.has_parent_path()) prepare_dir(csv.parent_path().string());
  RunManifest m{"simulate", {{"scenario", dynamics::to_json(scn)}}, {{"seed", scn.seed}, {"source", source}}, {}, 0.0};
  write_csv(frame, csv);
  m.artifacts.push_back(csv);
  m.duration_s = clock.seconds();
  write_manifest(m, sibling_manifest(csv));
  out << "wrote " << frame.length() << " samples x " << frame.channels().size() << " channels to " << csv.string()
      << "\n";
  return kExitOk;
}

int cmd_rod_response(const std::string& rod_path, const std::string& out_path, double omega_min, double omega_max,
                     std::size_t points, std::ostream& out) {
  Clock clock;
  if (!(omega_min > 0.0) || !(omega_max > omega_min) || !std::isfinite(omega_max)) {
    throw ConfigError("frequency range must satisfy 0 < omega-min < omega-max");
  }
  if (points < 2) throw ConfigError("--points must be >= 2");
  const json j = json_fields::load_file(rod_path);
  const auto rod = dynamics::scenario_from_json(json{{"rod", j}}).rod;
  dynamics::validate(rod);
  std::string csv = "omega_rad_s,gain,phase_rad\n";
  const double step = std::log(omega_max / omega_min) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    const double w = i + 1 == points ? omega_max : omega_min * std::exp(step * static_cast<double>(i));
    const auto gp = dynamics::rod_gain_phase(w, rod);
    csv += io::format_double(w) + ',' + io::format_double(gp.gain) + ',' + io::format_double(gp.phase) + '\n';
  }
  const fs::path path(out_path);
  if (path.has_parent_path()) prepare_dir(path.parent_path().string());
  RunManifest m{"rod-response",
                {{"rod", j}, {"omega_min", omega_min}, {"omega_max", omega_max}, {"points", points}},
                json::object(),
                {},
                0.0};
  write_text(path, csv, m);
  m.duration_s = clock.seconds();
  write_manifest(m, sibling_manifest(path));
  out << "wrote " << points << " response points to " << path.string() << "\n";
  return kExitOk;
}

int cmd_quality(const std::string& signal_path, const std::string& out_path, std::size_t segment, std::ostream& out) {
  Clock clock;
  const auto frame = read_csv(signal_path);
  quality::WelchConfig welch;
  welch.segment_len = segment;
  const auto report = quality::quality_report(frame, welch);
  const fs::path path(out_path);
  if (path.has_parent_path()) prepare_dir(path.parent_path().string());
  const auto input = io::read_bytes(signal_path);
  RunManifest m{"quality",
                {{"signal", fs::path(signal_path).filename().string()},
                 {"signal_fnv1a64", io::hex64(io::fnv1a64(input))},
                 {"segment_len", segment}},
                json::object(),
                {},
                0.0};
  write_text(path, to_json(report).dump(2) + "\n", m);
  m.duration_s = clock.seconds();
  write_manifest(m, sibling_manifest(path));
  out << "quality report for " << report.channels.size() << " channels written to " << path.string() << "\n";
  return kExitOk;
}

json plan_seeds(const ResolvedPlan& r) {
  return {{"master_seed", r.plan.master_seed}, {"source", r.seed_source}};
}

int cmd_preprocess(const std::string& plan_path, const std::string& out_dir, const Overrides& o, std::ostream& out) {
  Clock clock;
  const auto r = resolve_plan(plan_path, o);
  const auto dir = prepare_dir(out_dir);
  const auto data = experiment::generate_dataset(r.plan);
  RunManifest m{"preprocess", {{"plan", experiment::to_json(r.plan)}}, plan_seeds(r), {}, 0.0};
  experiment::write_dataset(data, r.plan, dir / "windows.csv");
  m.artifacts = {dir / "windows.csv", dir / "windows.json"};
  m.duration_s = clock.seconds();
  write_manifest(m, dir / "manifest.json");
  out << "wrote " << data.size() << " windows to " << (dir / "windows.csv").string() << "\n";
  return kExitOk;
}

int cmd_train(const std::string& plan_path, const std::string& out_dir, const Overrides& o,
              const std::optional<std::string>& model_flag, std::ostream& out, std::ostream& err) {
  Clock clock;
  const auto r = resolve_plan(plan_path, o);
  const auto kind = models::model_kind_from_string(model_flag.value_or(r.model.value_or("icnn_lstm")));
  const auto dir = prepare_dir(out_dir);
  const auto data = experiment::prepare_model_data(r.plan);
  err << "training " << models::to_string(kind) << " on " << data.train.size() << " windows\n";
  auto clf = models::make_classifier(kind, r.plan.classifier, r.plan.window_length);
  const auto history = clf->fit(data.train.window_set(), r.plan.master_seed);

  RunManifest m{"train",
                {{"plan", experiment::to_json(r.plan)}, {"model", models::to_string(kind)}},
                plan_seeds(r),
                {},
                0.0};
  std::error_code ignored;
  fs::remove(dir / "model.bin", ignored);
  clf->save(dir / "model.json");
  m.artifacts.push_back(dir / "model.json");
  if (fs::exists(dir / "model.bin")) m.artifacts.push_back(dir / "model.bin");
  json h = {{"model", models::to_string(kind)},
            {"train_count", data.train.size()},
            {"history", history ? models::to_json(*history) : json(nullptr)}};
  write_text(dir / "history.json", h.dump(2) + "\n", m);
  m.duration_s = clock.seconds();
  write_manifest(m, dir / "manifest.json");
  out << "trained " << models::to_string(kind);
  if (history) out << " for " << history->epochs.size() << " epochs (best epoch " << history->best_epoch << ")";
  out << "; model written to " << (dir / "model.json").string() << "\n";
  return kExitOk;
}

int cmd_evaluate(const std::string& plan_path, const std::string& out_dir, const std::string& model_path,
                 const Overrides& o, std::ostream& out) {
  Clock clock;
  const auto r = resolve_plan(plan_path, o);
  const auto dir = prepare_dir(out_dir);
  const fs::path model_file = model_path.empty() ? dir / "model.json" : fs::path(model_path);
  auto clf = models::load_classifier(model_file);
  const auto data = experiment::prepare_model_data(r.plan);
  std::vector<std::vector<double>> windows;
  std::vector<models::HazardLabel> labels;
  for (const auto& w : data.test.windows) {
    windows.push_back(w.values);
    labels.push_back(w.label);
  }
  const auto report = models::make_report(labels, clf->predict(windows));
  RunManifest m{"evaluate",
                {{"plan", experiment::to_json(r.plan)}, {"model", models::to_string(clf->kind())}},
                plan_seeds(r),
                {},
                0.0};
  json ej = models::to_json(report);
  ej["model"] = models::to_string(clf->kind());
  write_text(dir / "evaluation.json", ej.dump(2) + "\n", m);
  const auto table = models::confusion_table(report);
  write_text(dir / "confusion.txt", table, m);
  m.duration_s = clock.seconds();
  write_manifest(m, dir / "evaluation_manifest.json");
  out << table;
  return kExitOk;
}

int cmd_compare_models(const std::string& plan_path, const std::string& out_dir, const Overrides& o,
                       std::ostream& out, std::ostream& err) {
  Clock clock;
  const auto r = resolve_plan(plan_path, o);
  const auto dir = prepare_dir(out_dir);
  const auto report = experiment::compare_models(r.plan, r.plan.models, o.threads,
                                                 [&](const std::string& msg) { err << msg << "\n"; });
  RunManifest m{"compare-models", {{"plan", experiment::to_json(r.plan)}}, plan_seeds(r), {}, 0.0};
  m.seeds["run_seeds"] = json::array();
  for (std::size_t i = 0; i < r.plan.runs; ++i) m.seeds["run_seeds"].push_back(r.plan.master_seed + i);
  write_text(dir / "model_comparison.json", experiment::to_json(report).dump(2) + "\n", m);
  write_text(dir / "model_runs.csv", experiment::model_runs_csv(report), m);
  write_text(dir / "model_summary.csv", experiment::model_summary_csv(report), m);
  m.duration_s = clock.seconds();
  write_manifest(m, dir / "manifest.json");
  out << experiment::model_summary_csv(report);
  return kExitOk;
}

int cmd_compare_sensors(const std::string& plan_path, const std::string& out_dir, const Overrides& o,
                        std::ostream& out, std::ostream& err) {
  Clock clock;
  const auto r = resolve_plan(plan_path, o);
  const auto dir = prepare_dir(out_dir);
  const auto report = experiment::compare_sensors(r.plan, [&](const std::string& msg) { err << msg << "\n"; });
  RunManifest m{"compare-sensors", {{"plan", experiment::to_json(r.plan)}}, plan_seeds(r), {}, 0.0};
  write_text(dir / "sensor_comparison.json", experiment::to_json(report).dump(2) + "\n", m);
  write_text(dir / "sensor_grid.csv", experiment::sensor_grid_csv(report), m);
  m.duration_s = clock.seconds();
  write_manifest(m, dir / "manifest.json");
  out << experiment::sensor_grid_csv(report);
  return kExitOk;
}

void add_plan_overrides(CLI::App* sub, Overrides& o, bool training) {
  sub->add_option("--seed", o.seed, "Master seed (falls back to the plan, then MAGCLIMB_SEED)");
  sub->add_option("--cutoff-hz", o.cutoff_hz, "Low-pass cutoff frequency in Hz");
  if (training) {
    sub->add_option("--pool-window", o.pool_window, "ICNN max-pool window (1 disables pooling)");
    sub->add_option("--epochs", o.epochs, "Epoch cap for gradient-trained models");
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hazard-state classification toolkit for magnetic-adhesion climbing robots", "magclimb"};
  app.set_version_flag("--version", MAGCLIMB_VERSION);
  app.require_subcommand(1);

  Overrides o;
  std::string in_path, out_path, model_path;
  std::optional<std::string> model_flag;
  double omega_min = 0.1, omega_max = 1000.0;
  std::size_t points = 200, segment = 256;

  auto* sim = app.add_subcommand("simulate", "Simulate a scenario into a six-channel CSV");
  sim->add_option("scenario", in_path, "Scenario JSON (or a simulate manifest)")->required();
  sim->add_option("out", out_path, "Output CSV path")->required();
  sim->add_option("--seed", o.seed, "Simulation seed (falls back to the scenario, then MAGCLIMB_SEED)");

  auto* rod = app.add_subcommand("rod-response", "Tabulate rod gain and phase over a log-spaced grid");
  rod->add_option("rod", in_path, "Rod JSON with rod_stiffness, rod_damping, tip_mass")->required();
  rod->add_option("out", out_path, "Output CSV path")->required();
  rod->add_option("--omega-min", omega_min, "Lowest angular frequency [rad/s]")->capture_default_str();
  rod->add_option("--omega-max", omega_max, "Highest angular frequency [rad/s]")->capture_default_str();
  rod->add_option("--points", points, "Grid points")->capture_default_str();

  auto* qual = app.add_subcommand("quality", "Signal-quality metrics for every channel of a CSV");
  qual->add_option("signal", in_path, "Signal CSV")->required();
  qual->add_option("out", out_path, "Output JSON path")->required();
  qual->add_option("--segment", segment, "Welch segment length")->capture_default_str();

  auto* pre = app.add_subcommand("preprocess", "Generate the labeled window dataset of a plan");
  auto* train = app.add_subcommand("train", "Train one classifier on the plan's training split");
  auto* eval = app.add_subcommand("evaluate", "Evaluate a trained classifier on the plan's test split");
  auto* cmp_m = app.add_subcommand("compare-models", "Repeated-run comparison of every model in the plan");
  auto* cmp_s = app.add_subcommand("compare-sensors", "Quality and accuracy grid over levels and sensors");
  for (auto* sub : {pre, train, eval, cmp_m, cmp_s}) {
    sub->add_option("plan", in_path, "Experiment plan JSON (or a run manifest)")->required();
    sub->add_option("out_dir", out_path, "Output directory")->required();
  }
  add_plan_overrides(pre, o, false);
  add_plan_overrides(train, o, true);
  add_plan_overrides(eval, o, true);
  add_plan_overrides(cmp_m, o, true);
  add_plan_overrides(cmp_s, o, true);
  train->add_option("--model", model_flag, "icnn_lstm | lstm | rnn | bp | rf | knn");
  eval->add_option("--model-path", model_path, "Model manifest (default: <out_dir>/model.json)");
  cmp_m->add_option("--model", o.models, "Restrict to these models (repeatable)");
  cmp_m->add_option("--threads", o.threads, "Concurrent training runs")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (o.threads == 0) throw ConfigError("--threads must be >= 1");
    if (*sim) return cmd_simulate(in_path, out_path, o, out);
    if (*rod) return cmd_rod_response(in_path, out_path, omega_min, omega_max, points, out);
    if (*qual) return cmd_quality(in_path, out_path, segment, out);
    if (*pre) return cmd_preprocess(in_path, out_path, o, out);
    if (*train) return cmd_train(in_path, out_path, o, model_flag, out, err);
    if (*eval) return cmd_evaluate(in_path, out_path, model_path, o, out);
    if (*cmp_m) return cmd_compare_models(in_path, out_path, o, out, err);
    if (*cmp_s) return cmd_compare_sensors(in_path, out_path, o, out, err);
  } catch (const TrainingError& e) {
    err << "training error: " << e.what() << "\n";
    return kExitTraining;
  } catch (const SimulationError& e) {
    err << "simulation error: " << e.what() << "\n";
    return kExitSimulation;
  } catch (const DomainError& e) {
    err << "simulation error: " << e.what() << "\n";
    return kExitSimulation;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitConfig;
}

}  // namespace magclimb::cli
