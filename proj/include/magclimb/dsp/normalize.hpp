#pragma once

#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

namespace magclimb::dsp {

enum class NormMode { MinMax, ZScore };

/// Fitted parameters for one channel. For MinMax `first`/`second` are x_min/x_max; for
/// ZScore they are the mean and population standard deviation.
struct NormParams {
  NormMode mode = NormMode::MinMax;
  double first = 0.0;
  double second = 1.0;
  /// Zero range (MinMax) or zero deviation (ZScore); the transform then outputs zeros.
  bool degenerate = false;

  bool operator==(const NormParams&) const = default;
};

struct Normalized {
  std::vector<double> values;
  NormParams params;
};

NormParams fit_minmax(std::span<const double> x);
NormParams fit_zscore(std::span<const double> x);

/// Applies fitted parameters. Degenerate parameters map every sample to 0.
std::vector<double> apply(const NormParams& params, std::span<const double> x);
/// Inverse of apply (non-degenerate parameters only).
std::vector<double> invert(const NormParams& params, std::span<const double> y);

/// (x - min) / (max - min); a constant input yields zeros with `degenerate` set.
Normalized minmax_normalize(std::span<const double> x);

/// (x - mu) / sigma with population sigma. Fits on `x` unless `params` is supplied.
Normalized zscore_normalize(std::span<const double> x, const std::optional<NormParams>& params = std::nullopt);

const char* to_string(NormMode mode);
NormMode norm_mode_from_string(const std::string& name);

nlohmann::json to_json(const NormParams& p);
NormParams norm_params_from_json(const nlohmann::json& j);

}  // namespace magclimb::dsp
