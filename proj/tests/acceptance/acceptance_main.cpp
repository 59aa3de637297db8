// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "magclimb/common/io.hpp"
#include "magclimb/dsp/butterworth.hpp"
#include "magclimb/dynamics/adhesion.hpp"
#include "magclimb/dynamics/rod.hpp"
#include "magclimb/dynamics/simulator.hpp"
#include "magclimb/experiment/comparison.hpp"
#include "magclimb/experiment/dataset.hpp"
#include "magclimb/experiment/plan.hpp"
#include "magclimb/models/architectures.hpp"
#include "magclimb/models/evaluation.hpp"
#include "magclimb/models/features.hpp"
#include "magclimb/models/knn.hpp"
#include "magclimb/neural/adam.hpp"
#include "magclimb/neural/gradient_check.hpp"
#include "magclimb/neural/layers.hpp"
#include "magclimb/quality/metrics.hpp"

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace magclimb;
using neural::Tensor;
using Clock = std::chrono::steady_clock;

const fs::path kConfigs = MAGCLIMB_CONFIG_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int precision = 6) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

Tensor<double> random_tensor(neural::Shape3 s, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor<double> t(s);
  for (auto& v : t.storage()) v = u(rng);
  return t;
}

// Magnitudes in [0.2, 1] with random signs.
Tensor<double> away_from_zero(neural::Shape3 s, std::uint64_t seed) {
  auto t = random_tensor(s, seed, 0.2, 1.0);
  std::mt19937_64 rng(seed + 1);
  for (auto& v : t.storage()) {
    if (rng() & 1) v = -v;
  }
  return t;
}

Tensor<double> one_hot(const std::vector<std::size_t>& classes) {
  Tensor<double> y({classes.size(), 1, models::kClassCount});
  for (std::size_t b = 0; b < classes.size(); ++b) y.at(b, 0, classes[b]) = 1.0;
  return y;
}

// ---------------------------------------------------------------- 1

Outcome gradient_correctness() {
  using namespace neural;
  const auto t0 = Clock::now();
  std::vector<std::pair<std::string, GradCheckResult>> results;
  auto layer_check = [&](const std::string& name, Layer<double>& layer, const Tensor<double>& x, std::uint64_t seed) {
    Rng rng(seed);
    layer.initialize(rng);
    results.emplace_back(name, check_layer_gradients(layer, x, 1e-5, seed));
  };

  for (Padding pad : {Padding::Same, Padding::Valid}) {
    Conv1D<double> conv(2, 3, 3, pad);
    layer_check(std::string("conv1d_") + to_string(pad), conv, random_tensor({2, 9, 2}, 11), 1);
  }
  AdaptiveRelu<double> prelu(3, 0.25);
  layer_check("adaptive_relu", prelu, away_from_zero({2, 7, 3}, 12), 2);
  Relu<double> relu;
  layer_check("relu", relu, away_from_zero({2, 5, 3}, 13), 3);
  MaxPool1D<double> pool(2);
  layer_check("maxpool1d", pool, random_tensor({2, 9, 3}, 14), 4);
  Dense<double> dense(5, 4);
  layer_check("dense", dense, random_tensor({3, 2, 5}, 15), 5);
  Flatten<double> flatten;
  layer_check("flatten", flatten, random_tensor({2, 4, 3}, 16), 6);
  {
    Dropout<double> drop(0.3, 7);
    const auto x = random_tensor({2, 6, 3}, 17);
    drop.forward(x, Mode::Train);
    drop.freeze_mask(true);
    results.emplace_back("dropout", check_layer_gradients(drop, x, 1e-5, 7));
  }
  for (bool seqs : {true, false}) {
    Lstm<double> lstm(3, 4, seqs);
    layer_check(std::string("lstm_") + (seqs ? "seq" : "last"), lstm, random_tensor({2, 6, 3}, 18), 8);
    SimpleRnn<double> rnn(3, 4, seqs, 0);
    layer_check(std::string("rnn_") + (seqs ? "seq" : "last"), rnn, random_tensor({2, 6, 3}, 19), 9);
  }

  models::IcnnLstmConfig icnn;
  icnn.filters = 3;
  icnn.lstm_hidden = 3;
  icnn.window_length = 8;
  auto g_icnn = models::build_icnn_lstm<double>(icnn, 11);
  results.emplace_back("model_icnn_lstm", check_model_gradients(g_icnn, random_tensor({2, 8, 1}, 3), one_hot({0, 2})));

  models::LstmBaselineConfig lstm_cfg;
  lstm_cfg.hidden = 3;
  lstm_cfg.dense_units = 4;
  lstm_cfg.window_length = 6;
  auto g_lstm = models::build_lstm_baseline<double>(lstm_cfg, 12);
  results.emplace_back("model_lstm", check_model_gradients(g_lstm, random_tensor({2, 6, 1}, 4), one_hot({1, 0})));

  models::RnnBaselineConfig rnn_cfg;
  rnn_cfg.hidden = 3;
  rnn_cfg.dense_units = 4;
  rnn_cfg.window_length = 6;
  auto g_rnn = models::build_rnn_baseline<double>(rnn_cfg, 13);
  results.emplace_back("model_rnn", check_model_gradients(g_rnn, random_tensor({2, 6, 1}, 5), one_hot({2, 1})));

  models::BpBaselineConfig bp_cfg;
  bp_cfg.hidden_units = 6;
  auto g_bp = models::build_bp_baseline<double>(bp_cfg, 14);
  results.emplace_back("model_bp", check_model_gradients(g_bp, random_tensor({3, 1, 5}, 6), one_hot({0, 1, 2})));

  const double elapsed = seconds_since(t0);
  double worst = 0.0;
  std::string worst_name;
  std::size_t checked = 0;
  for (const auto& [name, r] : results) {
    checked += r.checked;
    if (r.max_rel_error >= worst) {
      worst = r.max_rel_error;
      worst_name = name + " " + r.worst;
    }
  }
  const bool ok = worst < 1e-4 && elapsed < 120.0;
  return {ok, std::to_string(results.size()) + " checks, " + std::to_string(checked) + " entries, max rel err " +
                  fmt(worst, 3) + " (" + worst_name + "), " + fmt(elapsed, 3) + " s"};
}

// ---------------------------------------------------------------- 2

Outcome filter_fidelity() {
  const dsp::FilterSpec spec{4, 10.0, 100.0};
  const auto coeffs = dsp::design_butterworth(spec);
  const double dc = std::abs(dsp::frequency_response(coeffs, 0.0, spec.sample_rate_hz));
  const double at_cut = std::abs(dsp::frequency_response(coeffs, spec.cutoff_hz, spec.sample_rate_hz));
  std::vector<double> mag(200);
  for (std::size_t i = 0; i < mag.size(); ++i) {
    const double f = 0.5 * spec.sample_rate_hz * static_cast<double>(i) / static_cast<double>(mag.size() - 1);
    mag[i] = std::abs(dsp::frequency_response(coeffs, f, spec.sample_rate_hz));
  }
  std::size_t rises = 0;
  for (std::size_t i = 1; i < mag.size(); ++i) {
    if (mag[i] > mag[i - 1]) ++rises;
  }
  const bool ok = std::abs(dc - 1.0) <= 1e-9 && std::abs(at_cut - std::sqrt(0.5)) <= 1e-3 && rises == 0 &&
                  dsp::is_stable(coeffs);
  return {ok, "|H(0)|-1 = " + fmt(dc - 1.0, 3) + ", |H(10 Hz)| = " + fmt(at_cut, 7) + ", increases on 200-point grid: " +
                  std::to_string(rises)};
}

// ---------------------------------------------------------------- 3

Outcome rod_physics() {
  const dynamics::RodModel rod;
  const auto zero = dynamics::rod_gain_phase(0.0, rod);
  const double wc = dynamics::amplification_cutoff(rod);
  const bool cutoff_ok = std::abs(wc - std::sqrt(2.0 * rod.rod_stiffness / rod.tip_mass)) <= 1e-12 * wc;

  std::size_t band_violations = 0;
  for (int i = 0; i < 500; ++i) {
    const double w = wc * std::pow(10.0, -2.0 + 3.0 * (i + 0.5) / 500.0);
    const double g = dynamics::rod_gain_phase(w, rod).gain;
    if ((w < wc && !(g > 1.0)) || (w > wc && !(g < 1.0))) ++band_violations;
  }

  const double wn = std::sqrt(rod.rod_stiffness / rod.tip_mass);
  double worst = 0.0;
  for (double r : {0.05, 0.2, 0.5, 0.8, 0.95, 1.0, 1.1, 1.4142, 2.0, 4.0}) {
    const double w = r * wn;
    const double analytic = dynamics::rod_gain_phase(w, rod).gain;
    const double simulated = dynamics::rod_steady_state_response(w, rod).gain;
    worst = std::max(worst, std::abs(simulated - analytic) / analytic);
  }
  const bool ok = std::abs(zero.gain - 1.0) <= 1e-12 && std::abs(zero.phase) <= 1e-12 && cutoff_ok &&
                  band_violations == 0 && worst < 0.01;
  return {ok, "|H(0)| = " + fmt(zero.gain, 15) + ", phi(0) = " + fmt(zero.phase, 3) + ", band violations " +
                  std::to_string(band_violations) + "/500, worst time-domain gain error " + fmt(100 * worst, 3) + "%"};
}

// ---------------------------------------------------------------- 4

Outcome stiffness_scaling() {
  const auto t0 = Clock::now();
  dynamics::AdhesionConfig six, four;
  six.plate_count = 6;
  four.plate_count = 4;
  const double analytic = dynamics::natural_frequency(six) / dynamics::natural_frequency(four);

  dynamics::SimScenario s;
  s.duration_s = 120.0;
  s.excitation_level = 0;
  s.seed = 31;
  auto peak_hz = [&](int n) {
    s.adhesion.plate_count = n;
    const auto trace = dynamics::simulate_trace(s);
    const auto psd = quality::psd_welch(trace.body_acc, s.sample_rate_hz, 1024, 0.5);
    // Peak search above the 25 Hz drive tone.
    std::size_t best = 1;
    for (std::size_t i = 1; i < psd.density.size(); ++i) {
      if (psd.freqs[i] > 26.0 && psd.density[i] > psd.density[best]) best = i;
    }
    return psd.freqs[best];
  };
  const double f6 = peak_hz(6), f4 = peak_hz(4);
  const double ratio = f6 / f4;
  const double elapsed = seconds_since(t0);
  const bool ok = std::abs(analytic - 1.224745) <= 1e-6 && std::abs(analytic - std::sqrt(1.5)) <= 1e-12 &&
                  std::abs(ratio - 1.2247) <= 0.05 * 1.2247 && elapsed < 30.0;
  return {ok, "analytic " + fmt(analytic, 13) + ", PSD peaks " + fmt(f6, 5) + " / " + fmt(f4, 5) + " Hz = " +
                  fmt(ratio, 5) + ", " + fmt(elapsed, 3) + " s"};
}

// ---------------------------------------------------------------- 5

Outcome sensor_quality_ordering() {
  const auto plan = experiment::load_plan((kConfigs / "default_plan.json").string());
  const auto grid = experiment::sensor_quality_grid(plan);
  std::map<int, double> rod_std;
  std::map<int, double> centroid_body, centroid_rod;
  for (const auto& q : grid) {
    if (q.sensor == experiment::SensorKind::Rod) {
      rod_std[q.level] = q.std;
      centroid_rod[q.level] = q.spectral_centroid_hz;
    } else {
      centroid_body[q.level] = q.spectral_centroid_hz;
    }
  }
  bool monotone = rod_std.size() == plan.excitation_levels.size();
  std::string stds;
  double prev = -1.0;
  for (const auto& [level, sd] : rod_std) {
    monotone = monotone && sd > prev;
    prev = sd;
    stds += (stds.empty() ? "" : " < ") + fmt(sd, 5);
  }
  const int top = *std::max_element(plan.excitation_levels.begin(), plan.excitation_levels.end());
  const bool centroid_ok = centroid_body.count(top) && centroid_rod.count(top) && centroid_body[top] >= centroid_rod[top];
  return {monotone && centroid_ok && top == 3, "rod STD by level " + stds + "; level-3 centroid body " +
                                                   fmt(centroid_body[top], 5) + " Hz vs rod " +
                                                   fmt(centroid_rod[top], 5) + " Hz"};
}

// ---------------------------------------------------------------- 6

Outcome end_to_end_classification() {
  const auto t0 = Clock::now();
  const auto plan = experiment::load_plan((kConfigs / "default_plan.json").string());
  const auto report = experiment::compare_models(plan, {models::ModelKind::IcnnLstm, models::ModelKind::Knn}, 1);
  const auto& icnn = report.summary(models::ModelKind::IcnnLstm);
  const auto& knn = report.summary(models::ModelKind::Knn);
  double worst_icnn = 1.0;
  std::string per_run;
  for (const auto& r : report.runs) {
    if (r.model != models::ModelKind::IcnnLstm) continue;
    worst_icnn = std::min(worst_icnn, r.report.accuracy);
    per_run += (per_run.empty() ? "" : ",") + fmt(r.report.accuracy, 4);
  }
  const double elapsed = seconds_since(t0);
  const bool ok = icnn.runs == 5 && worst_icnn >= 0.90 && icnn.mean_accuracy >= knn.mean_accuracy && elapsed <= 600.0;
  return {ok, "ICNN-LSTM runs [" + per_run + "] mean " + fmt(icnn.mean_accuracy, 4) + " vs KNN mean " +
                  fmt(knn.mean_accuracy, 4) + " (" + std::to_string(report.train_count) + " train / " +
                  std::to_string(report.test_count) + " test windows), " + fmt(elapsed, 4) + " s"};
}

// ---------------------------------------------------------------- 7

models::HazardLabel knn_oracle(const std::vector<std::vector<double>>& x, const std::vector<models::HazardLabel>& y,
                               const std::vector<double>& q, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> d;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) s += (x[i][j] - q[j]) * (x[i][j] - q[j]);
    d.emplace_back(s, i);
  }
  std::sort(d.begin(), d.end());
  std::array<std::size_t, models::kClassCount> votes{};
  for (std::size_t i = 0; i < k; ++i) ++votes[models::index_of(y[d[i].second])];
  std::size_t best = 0;
  for (std::size_t c = 1; c < votes.size(); ++c) {
    if (votes[c] > votes[best]) best = c;
  }
  return models::label_from_index(static_cast<long long>(best));
}

Outcome oracle_equivalence() {
  std::mt19937_64 rng(707);
  std::size_t mismatches = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t n = 5 + rng() % 60, dim = 1 + rng() % 6, k = 1 + rng() % std::min<std::size_t>(n, 9);
    // Even instances draw from a coarse integer lattice.
    const bool lattice = inst % 2 == 0;
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    auto draw = [&] { return lattice ? static_cast<double>(static_cast<int>(rng() % 5) - 2) : u(rng); };
    std::vector<std::vector<double>> x(n, std::vector<double>(dim));
    std::vector<models::HazardLabel> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (auto& v : x[i]) v = draw();
      y[i] = models::label_from_index(static_cast<long long>(rng() % models::kClassCount));
    }
    std::vector<double> q(dim);
    for (auto& v : q) v = draw();
    if (models::knn_classify(x, y, q, k) != knn_oracle(x, y, q, k)) ++mismatches;
  }

  std::size_t feature_fails = 0;
  double worst = 0.0;
  for (int w = 0; w < 20; ++w) {
    std::vector<double> window(4 + 3 * w);
    for (std::size_t i = 0; i < window.size(); ++i) {
      window[i] = static_cast<double>((static_cast<int>(i) * (w + 3)) % 11 - 5) * 0.25 + 0.125 * w;
    }
    long double sum = 0, sq = 0;
    double mx = window[0], mn = window[0];
    for (double v : window) {
      sum += v;
      sq += static_cast<long double>(v) * v;
      mx = std::max(mx, v);
      mn = std::min(mn, v);
    }
    const long double n = static_cast<long double>(window.size());
    const long double mean = sum / n;
    long double var = 0;
    for (double v : window) var += (v - mean) * (v - mean);
    var /= n;
    const models::FeatureVector expected{static_cast<double>(mean), static_cast<double>(var), mx, mn,
                                         static_cast<double>(std::sqrt(sq))};
    const auto got = models::sliding_window_features(window);
    for (std::size_t f = 0; f < models::kFeatureCount; ++f) {
      const double err = std::abs(got[f] - expected[f]);
      worst = std::max(worst, err);
      if (err > 1e-12) ++feature_fails;
    }
  }
  return {mismatches == 0 && feature_fails == 0, "KNN mismatches " + std::to_string(mismatches) +
                                                     "/100, feature max abs error " + fmt(worst, 3) + " over 20 windows"};
}

// ---------------------------------------------------------------- 8

int run_cli_process(const std::string& args) {
  const std::string cmd = std::string(MAGCLIMB_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> checksums(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name.find("manifest") != std::string::npos) continue;
    out[name] = io::hex64(io::fnv1a64(io::read_bytes(e.path())));
  }
  return out;
}

Outcome cli_determinism() {
  const auto root = fs::temp_directory_path() / "magclimb_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const auto scenario = (kConfigs / "default_scenario.json").string();
  const auto plan = (kConfigs / "toy_plan.json").string();
  std::vector<std::string> lines;
  bool ok = true;
  for (const std::string& command : {std::string("simulate"), std::string("train"), std::string("compare-models")}) {
    std::map<std::string, std::string> sums[2];
    for (int rep = 0; rep < 2; ++rep) {
      const auto dir = root / (command + "_" + std::to_string(rep));
      fs::create_directories(dir);
      std::string args;
      if (command == "simulate") {
        args = "simulate " + scenario + " " + (dir / "signal.csv").string() + " --seed 17";
      } else if (command == "train") {
        args = "train " + plan + " " + dir.string() + " --seed 17";
      } else {
        args = "compare-models " + plan + " " + dir.string() + " --seed 17 --threads 1";
      }
      if (run_cli_process(args) != 0) {
        ok = false;
        lines.push_back(command + " exited non-zero");
      }
      sums[rep] = checksums(dir);
    }
    const bool same = !sums[0].empty() && sums[0] == sums[1];
    ok = ok && same;
    lines.push_back(command + (same ? " identical" : " DIFFERS") + " (" + std::to_string(sums[0].size()) + " files)");
  }
  std::string detail;
  for (const auto& l : lines) detail += (detail.empty() ? "" : ", ") + l;
  return {ok, detail};
}

// ---------------------------------------------------------------- 9

Outcome adam_hand_check() {
  neural::Param<double> theta("theta", {1});
  theta.value[0] = 1.0;
  theta.grad[0] = 1.0;
  neural::AdamState<double> state;
  state.config.lr = 0.001;
  neural::adam_step<double>({&theta}, state);
  const double first = theta.value[0];

  neural::Param<double> still("still", {4, 3});
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (auto& v : still.value) v = u(rng);
  const auto before = still.value;
  neural::AdamState<double> fresh;
  neural::adam_step<double>({&still}, fresh);
  const bool unchanged = std::memcmp(before.data(), still.value.data(), before.size() * sizeof(double)) == 0;

  neural::Param<float> still_f("still_f", {5});
  for (auto& v : still_f.value) v = static_cast<float>(u(rng));
  const auto before_f = still_f.value;
  neural::AdamState<float> fresh_f;
  neural::adam_step<float>({&still_f}, fresh_f);
  const bool unchanged_f = std::memcmp(before_f.data(), still_f.value.data(), before_f.size() * sizeof(float)) == 0;

  return {std::abs(first - 0.999) <= 1e-9 && unchanged && unchanged_f,
          "theta' = " + fmt(first, 12) + ", zero-gradient step leaves parameters " +
              (unchanged && unchanged_f ? "bit-identical" : "CHANGED")};
}

// ---------------------------------------------------------------- 10

Outcome protocol_fidelity() {
  std::mt19937_64 rng(1010);
  std::size_t split_checks = 0, split_fails = 0;
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<models::HazardLabel> labels;
    for (auto label : models::kAllLabels) {
      const std::size_t count = 4 + rng() % 120;
      labels.insert(labels.end(), count, label);
    }
    std::shuffle(labels.begin(), labels.end(), rng);
    const auto split = experiment::split_dataset(labels, 0.7, rng());
    ++split_checks;
    const std::size_t n = labels.size();
    bool ok = split.train.size() == static_cast<std::size_t>(std::floor(0.7 * static_cast<double>(n))) &&
              split.test.size() == n - split.train.size();
    std::array<std::size_t, models::kClassCount> per_class{}, train_class{};
    for (auto l : labels) ++per_class[models::index_of(l)];
    for (auto i : split.train) ++train_class[models::index_of(labels[i])];
    for (std::size_t c = 0; c < models::kClassCount; ++c) {
      ok = ok && std::abs(static_cast<double>(train_class[c]) - 0.7 * static_cast<double>(per_class[c])) <= 1.0;
    }
    std::vector<std::size_t> all(split.train);
    all.insert(all.end(), split.test.begin(), split.test.end());
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> expected(n);
    std::iota(expected.begin(), expected.end(), 0);
    ok = ok && all == expected;
    if (!ok) ++split_fails;
  }

  std::size_t report_fails = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng() % 400;
    std::vector<models::HazardLabel> truth(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = models::label_from_index(static_cast<long long>(rng() % models::kClassCount));
      pred[i] = rng() % 3 == 0 ? models::label_from_index(static_cast<long long>(rng() % models::kClassCount))
                               : truth[i];
    }
    const auto report = models::make_report(truth, pred);
    const auto back = models::eval_report_from_json(json::parse(models::to_json(report).dump()));
    for (const auto& r : {report, back}) {
      std::size_t trace = 0, total = 0;
      for (std::size_t i = 0; i < models::kClassCount; ++i) {
        for (std::size_t j = 0; j < models::kClassCount; ++j) {
          total += r.confusion[i][j];
          if (i == j) trace += r.confusion[i][j];
        }
      }
      if (total != n || r.total != n || r.accuracy != static_cast<double>(trace) / static_cast<double>(total)) {
        ++report_fails;
      }
    }
  }
  return {split_fails == 0 && report_fails == 0, "split violations " + std::to_string(split_fails) + "/" +
                                                     std::to_string(split_checks) + ", report mismatches " +
                                                     std::to_string(report_fails) + "/50 (plus JSON round trip)"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient correctness", gradient_correctness},
      {"Butterworth fidelity", filter_fidelity},
      {"rod model physics", rod_physics},
      {"stiffness scaling", stiffness_scaling},
      {"sensor quality ordering", sensor_quality_ordering},
      {"end-to-end classification", end_to_end_classification},
      {"oracle equivalence", oracle_equivalence},
      {"CLI determinism", cli_determinism},
      {"Adam hand check", adam_hand_check},
      {"protocol fidelity", protocol_fidelity},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << (i + 1) << "] " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
