#include <sys/wait.h>

#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "magclimb/cli/cli.hpp"
#include "magclimb/common/io.hpp"
#include "magclimb/models/evaluation.hpp"

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using magclimb::cli::run_cli;

const fs::path kConfigs = MAGCLIMB_CONFIG_DIR;

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "magclimb");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

int run_binary(const std::string& args) {
  const std::string cmd = std::string(MAGCLIMB_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("magclimb_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::vector<double>> read_numeric_csv(const fs::path& path, std::string* header = nullptr) {
  std::istringstream in(magclimb::io::read_text(path));
  std::string line;
  std::getline(in, line);
  if (header) *header = line;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    for (const auto& cell : magclimb::io::split(line, ',')) row.push_back(std::stod(std::string(cell)));
    rows.push_back(row);
  }
  return rows;
}

TEST(CliSimulate, WritesDurationTimesRateRows) {
  const auto dir = scratch("sim");
  const auto r = run({"simulate", (kConfigs / "default_scenario.json").string(), (dir / "a.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto scn = json::parse(magclimb::io::read_text(kConfigs / "default_scenario.json"));
  const auto expected = static_cast<std::size_t>(std::llround(scn["duration_s"].get<double>() *
                                                              scn["sample_rate_hz"].get<double>()));
  std::string header;
  EXPECT_EQ(read_numeric_csv(dir / "a.csv", &header).size(), expected);
  EXPECT_EQ(header, "t,body_acc_x,body_acc_y,body_acc_z,rod_acc_x,rod_acc_y,rod_acc_z");
  ASSERT_TRUE(fs::exists(dir / "a.manifest.json"));
  const auto m = json::parse(magclimb::io::read_text(dir / "a.manifest.json"));
  EXPECT_EQ(m["command"], "simulate");
  EXPECT_EQ(m["artifacts"].size(), 1u);
  EXPECT_EQ(m["seeds"]["source"], "config");
}

TEST(CliSimulate, RepeatAndManifestReplayAreByteIdentical) {
  const auto dir = scratch("sim_repeat");
  const auto scn = (kConfigs / "default_scenario.json").string();
  ASSERT_EQ(run({"simulate", scn, (dir / "a.csv").string()}).code, 0);
  ASSERT_EQ(run({"simulate", scn, (dir / "b.csv").string()}).code, 0);
  ASSERT_EQ(run({"simulate", (dir / "a.manifest.json").string(), (dir / "c.csv").string()}).code, 0);
  const auto a = magclimb::io::read_bytes(dir / "a.csv");
  EXPECT_EQ(a, magclimb::io::read_bytes(dir / "b.csv"));
  EXPECT_EQ(a, magclimb::io::read_bytes(dir / "c.csv"));
}

TEST(CliSimulate, SeedFlagOverridesFile) {
  const auto dir = scratch("sim_seed");
  const auto scn = (kConfigs / "default_scenario.json").string();
  ASSERT_EQ(run({"simulate", scn, (dir / "a.csv").string()}).code, 0);
  ASSERT_EQ(run({"simulate", scn, (dir / "b.csv").string(), "--seed", "99"}).code, 0);
  EXPECT_NE(magclimb::io::read_bytes(dir / "a.csv"), magclimb::io::read_bytes(dir / "b.csv"));
  const auto m = json::parse(magclimb::io::read_text(dir / "b.manifest.json"));
  EXPECT_EQ(m["seeds"]["seed"], 99);
  EXPECT_EQ(m["seeds"]["source"], "flag");
}

TEST(CliSimulate, ErrorExitCodes) {
  const auto dir = scratch("sim_errors");
  EXPECT_EQ(run({"simulate", (dir / "missing.json").string(), (dir / "a.csv").string()}).code, 2);

  magclimb::io::write_text_atomic(dir / "broken.json", "{\n  \"seed\": 3,\n  \"duration_s\": \n}\n");
  const auto broken = run({"simulate", (dir / "broken.json").string(), (dir / "a.csv").string()});
  EXPECT_EQ(broken.code, 2);
  EXPECT_NE(broken.err.find("broken.json:4"), std::string::npos) << broken.err;

  magclimb::io::write_text_atomic(dir / "typo.json", R"({"duraton_s": 5})");
  const auto typo = run({"simulate", (dir / "typo.json").string(), (dir / "a.csv").string()});
  EXPECT_EQ(typo.code, 2);
  EXPECT_NE(typo.err.find("duraton_s"), std::string::npos);

  magclimb::io::write_text_atomic(dir / "neg.json", R"({"rod": {"tip_mass": -1.0}})");
  EXPECT_EQ(run({"simulate", (dir / "neg.json").string(), (dir / "a.csv").string()}).code, 3);
  EXPECT_FALSE(fs::exists(dir / "a.csv"));
}

TEST(CliRodResponse, LowFrequencyUnityMonotoneGridAndResonancePeak) {
  const auto dir = scratch("rod");
  const auto r = run({"rod-response", (kConfigs / "default_rod.json").string(), (dir / "rod.csv").string(),
                      "--omega-min", "0.1", "--omega-max", "1000", "--points", "400"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::string header;
  const auto rows = read_numeric_csv(dir / "rod.csv", &header);
  EXPECT_EQ(header, "omega_rad_s,gain,phase_rad");
  ASSERT_EQ(rows.size(), 400u);
  EXPECT_NEAR(rows.front()[1], 1.0, 1e-4);
  EXPECT_NEAR(rows.front()[2], 0.0, 1e-4);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_GT(rows[i][0], rows[i - 1][0]);

  const auto rod = json::parse(magclimb::io::read_text(kConfigs / "default_rod.json"));
  const double wn = std::sqrt(rod["rod_stiffness"].get<double>() / rod["tip_mass"].get<double>());
  std::size_t peak = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i][1] > rows[peak][1]) peak = i;
  }
  EXPECT_NEAR(rows[peak][0] / wn, 1.0, 0.03);
}

TEST(CliRodResponse, InvalidRangeExitsTwo) {
  const auto dir = scratch("rod_bad");
  const auto rod = (kConfigs / "default_rod.json").string();
  const auto out = (dir / "rod.csv").string();
  EXPECT_EQ(run({"rod-response", rod, out, "--omega-min", "10", "--omega-max", "1"}).code, 2);
  EXPECT_EQ(run({"rod-response", rod, out, "--omega-min", "0"}).code, 2);
  EXPECT_EQ(run({"rod-response", rod, out, "--points", "1"}).code, 2);
  EXPECT_EQ(run({"rod-response", rod, out, "--points", "many"}).code, 2);
  EXPECT_FALSE(fs::exists(out));
}

TEST(CliQuality, SixMetricsPerChannelAndDeterministic) {
  const auto dir = scratch("quality");
  ASSERT_EQ(run({"simulate", (kConfigs / "default_scenario.json").string(), (dir / "s.csv").string()}).code, 0);
  ASSERT_EQ(run({"quality", (dir / "s.csv").string(), (dir / "q1.json").string()}).code, 0);
  ASSERT_EQ(run({"quality", (dir / "s.csv").string(), (dir / "q2.json").string()}).code, 0);
  EXPECT_EQ(magclimb::io::read_bytes(dir / "q1.json"), magclimb::io::read_bytes(dir / "q2.json"));

  const auto q = json::parse(magclimb::io::read_text(dir / "q1.json"));
  ASSERT_EQ(q["channels"].size(), 6u);
  for (const auto& ch : q["channels"]) {
    for (const char* key : {"energy", "std", "excess_kurtosis", "skewness", "spectral_centroid_hz", "psd"}) {
      EXPECT_TRUE(ch.contains(key)) << ch["name"] << " lacks " << key;
    }
    EXPECT_TRUE(ch["degenerate"].empty());
  }
}

TEST(CliQuality, ConstantChannelIsFlaggedNotFatal) {
  const auto dir = scratch("quality_const");
  std::string csv = "t,flat,wave\n";
  for (int i = 0; i < 600; ++i) {
    csv += magclimb::io::format_double(i * 0.01) + ",1.5," + magclimb::io::format_double(std::sin(0.3 * i)) + "\n";
  }
  magclimb::io::write_text_atomic(dir / "s.csv", csv);
  const auto r = run({"quality", (dir / "s.csv").string(), (dir / "q.json").string(), "--segment", "128"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto q = json::parse(magclimb::io::read_text(dir / "q.json"));
  const auto& flat = q["channels"][0];
  EXPECT_EQ(flat["name"], "flat");
  EXPECT_FALSE(flat["degenerate"].empty());
  EXPECT_TRUE(q["channels"][1]["degenerate"].empty());
}

TEST(CliTrain, ToyPlanFinishesQuicklyWithBlobAndHistory) {
  const auto dir = scratch("train");
  const auto start = std::chrono::steady_clock::now();
  const auto r = run({"train", (kConfigs / "toy_plan.json").string(), dir.string()});
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_LE(elapsed, 60.0);
  for (const char* f : {"model.json", "model.bin", "history.json", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  const auto h = json::parse(magclimb::io::read_text(dir / "history.json"));
  EXPECT_EQ(h["model"], "icnn_lstm");
  EXPECT_FALSE(h["history"]["epochs"].empty());
}

TEST(CliTrain, EveryModelFlagTrainsAndEvaluates) {
  for (const std::string model : {"lstm", "rnn", "bp", "rf", "knn"}) {
    const auto dir = scratch("train_" + model);
    const auto t = run({"train", (kConfigs / "toy_plan.json").string(), dir.string(), "--model", model});
    ASSERT_EQ(t.code, 0) << model << ": " << t.err;
    const auto e = run({"evaluate", (kConfigs / "toy_plan.json").string(), dir.string()});
    ASSERT_EQ(e.code, 0) << model << ": " << e.err;
    const auto ej = json::parse(magclimb::io::read_text(dir / "evaluation.json"));
    EXPECT_EQ(ej["model"], model);
  }
}

TEST(CliTrain, OverridesAreRecordedInManifest) {
  const auto dir = scratch("train_overrides");
  const auto r = run({"train", (kConfigs / "toy_plan.json").string(), dir.string(), "--pool-window", "1",
                      "--cutoff-hz", "12", "--epochs", "3", "--seed", "41"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto m = json::parse(magclimb::io::read_text(dir / "manifest.json"));
  EXPECT_EQ(m["config"]["plan"]["classifier"]["icnn_lstm"]["pool_window"], 1);
  EXPECT_EQ(m["config"]["plan"]["cutoff_hz"], 12.0);
  EXPECT_EQ(m["config"]["plan"]["classifier"]["train"]["epochs"], 3);
  EXPECT_EQ(m["seeds"]["master_seed"], 41);
  const auto h = json::parse(magclimb::io::read_text(dir / "history.json"));
  EXPECT_LE(h["history"]["epochs"].size(), 3u);
}

TEST(CliTrain, ReplayFromManifestReproducesArtifacts) {
  const auto a = scratch("replay_a");
  const auto b = scratch("replay_b");
  ASSERT_EQ(run({"train", (kConfigs / "toy_plan.json").string(), a.string(), "--seed", "5"}).code, 0);
  ASSERT_EQ(run({"train", (a / "manifest.json").string(), b.string()}).code, 0);
  const auto ma = json::parse(magclimb::io::read_text(a / "manifest.json"));
  const auto mb = json::parse(magclimb::io::read_text(b / "manifest.json"));
  EXPECT_EQ(ma["artifacts"], mb["artifacts"]);
  EXPECT_EQ(ma["config"], mb["config"]);
}

TEST(CliTrain, InvalidPlanExitsTwo) {
  const auto dir = scratch("train_bad");
  magclimb::io::write_text_atomic(dir / "plan.json", R"({"split_ratio": 1.5})");
  EXPECT_EQ(run({"train", (dir / "plan.json").string(), (dir / "out").string()}).code, 2);
  EXPECT_EQ(run({"train", (kConfigs / "toy_plan.json").string(), (dir / "out").string(), "--model", "svm"}).code, 2);
  EXPECT_EQ(run({"train", (kConfigs / "toy_plan.json").string(), (dir / "out").string(), "--pool-window", "0"}).code,
            2);
}

TEST(CliTrain, DivergenceExitsFour) {
  const auto dir = scratch("train_diverge");
  auto plan = json::parse(magclimb::io::read_text(kConfigs / "toy_plan.json"));
  plan["classifier"]["train"]["lr"] = 1e300;
  magclimb::io::write_text_atomic(dir / "plan.json", plan.dump());
  const auto r = run({"train", (dir / "plan.json").string(), (dir / "out").string(), "--model", "bp"});
  EXPECT_EQ(r.code, 4);
  EXPECT_NE(r.err.find("non-finite"), std::string::npos) << r.err;
}

TEST(CliEvaluate, PrintedTraceOverTotalMatchesAccuracy) {
  const auto dir = scratch("evaluate");
  ASSERT_EQ(run({"train", (kConfigs / "toy_plan.json").string(), dir.string()}).code, 0);
  const auto r = run({"evaluate", (kConfigs / "toy_plan.json").string(), dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, magclimb::io::read_text(dir / "confusion.txt"));

  const auto report = magclimb::models::eval_report_from_json(
      json::parse(magclimb::io::read_text(dir / "evaluation.json")));
  std::size_t trace = 0, total = 0;
  for (std::size_t i = 0; i < report.confusion.size(); ++i) {
    for (std::size_t j = 0; j < report.confusion.size(); ++j) {
      total += report.confusion[i][j];
      if (i == j) trace += report.confusion[i][j];
    }
  }
  EXPECT_EQ(total, report.total);
  EXPECT_DOUBLE_EQ(report.accuracy, static_cast<double>(trace) / static_cast<double>(total));

  // Parse the printed matrix back and check it against the stored one.
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  std::size_t printed_trace = 0, printed_total = 0;
  for (std::size_t row = 0; row < 3; ++row) {
    std::getline(in, line);
    const auto cells = magclimb::io::split(line, ' ');
    std::vector<std::size_t> counts;
    for (const auto& c : cells) {
      if (!c.empty() && std::isdigit(static_cast<unsigned char>(c[0]))) counts.push_back(std::stoul(std::string(c)));
    }
    ASSERT_EQ(counts.size(), 3u) << line;
    for (std::size_t col = 0; col < 3; ++col) {
      printed_total += counts[col];
      if (col == row) printed_trace += counts[col];
    }
  }
  EXPECT_EQ(printed_trace, trace);
  EXPECT_EQ(printed_total, total);
}

TEST(CliEvaluate, MissingModelExitsTwo) {
  const auto dir = scratch("evaluate_missing");
  EXPECT_EQ(run({"evaluate", (kConfigs / "toy_plan.json").string(), dir.string()}).code, 2);
}

TEST(CliCompare, ModelRunsCsvHasOneRowPerModelAndRun) {
  const auto dir = scratch("compare");
  auto plan = json::parse(magclimb::io::read_text(kConfigs / "toy_plan.json"));
  plan["runs"] = 2;
  plan["classifier"]["train"]["epochs"] = 2;
  magclimb::io::write_text_atomic(dir / "plan.json", plan.dump());
  const auto r = run({"compare-models", (dir / "plan.json").string(), (dir / "out").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(magclimb::io::read_text(dir / "out" / "model_runs.csv"));
  std::string line;
  std::size_t rows = 0;
  std::getline(in, line);
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 6u * 2u);
  EXPECT_TRUE(fs::exists(dir / "out" / "model_summary.csv"));
  EXPECT_TRUE(fs::exists(dir / "out" / "model_comparison.json"));
}

TEST(CliCompare, SensorGridCoversLevelsAndSensors) {
  const auto dir = scratch("compare_sensors");
  auto plan = json::parse(magclimb::io::read_text(kConfigs / "toy_plan.json"));
  plan["classifier"]["train"]["epochs"] = 2;
  magclimb::io::write_text_atomic(dir / "plan.json", plan.dump());
  const auto r = run({"compare-sensors", (dir / "plan.json").string(), (dir / "out").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rep = json::parse(magclimb::io::read_text(dir / "out" / "sensor_comparison.json"));
  const auto levels = plan["excitation_levels"].size();
  std::istringstream in(magclimb::io::read_text(dir / "out" / "sensor_grid.csv"));
  std::string line;
  std::size_t rows = 0;
  std::getline(in, line);
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, levels * 2);
  EXPECT_TRUE(rep.is_object());
}

TEST(CliProcess, BinaryExitCodes) {
  const auto dir = scratch("process");
  EXPECT_EQ(run_binary("--help"), 0);
  EXPECT_EQ(run_binary(""), 2);
  EXPECT_EQ(run_binary("frobnicate"), 2);
  EXPECT_EQ(run_binary("simulate " + (dir / "nope.json").string() + " " + (dir / "x.csv").string()), 2);
  EXPECT_EQ(run_binary("simulate " + (kConfigs / "default_scenario.json").string() + " " + (dir / "x.csv").string()),
            0);
}

TEST(CliProcess, OutputsStayInsideDeclaredDirectory) {
  const auto root = scratch("contained");
  const auto out = root / "out";
  ASSERT_EQ(run({"train", (kConfigs / "toy_plan.json").string(), out.string(), "--model", "knn"}).code, 0);
  std::size_t outside = 0;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.path() != out) ++outside;
  }
  EXPECT_EQ(outside, 0u);
}

}  // namespace
