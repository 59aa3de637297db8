// Command-line front end: one binary, eight subcommands.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace magclimb::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSimulation = 3;
inline constexpr int kExitTraining = 4;

/// Provenance written next to every command output. Re-running the command on the stored
/// config (plan and scenario commands accept a manifest in place of their config file)
/// reproduces the listed artifacts byte for byte.
struct RunManifest {
  std::string command;
  nlohmann::json config;
  nlohmann::json seeds;
  std::vector<std::filesystem::path> artifacts;
  double duration_s = 0.0;  ///< wall clock; the only field that varies between re-runs
};

/// Artifact entries carry file name, size and FNV-1a checksum.
nlohmann::json to_json(const RunManifest& m);
void write_manifest(const RunManifest& m, const std::filesystem::path& path);

/// Parses arguments and runs the selected subcommand. Returns the process exit code:
/// 0 success, 2 input or configuration error, 3 simulation error, 4 training error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace magclimb::cli
