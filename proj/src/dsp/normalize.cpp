#include "magclimb/dsp/normalize.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "magclimb/common/errors.hpp"
#include "magclimb/common/json_fields.hpp"

namespace magclimb::dsp {

namespace {

void require_non_empty(std::span<const double> x) {
  if (x.empty()) throw DataError("normalization needs a non-empty sequence");
}

}  // namespace

NormParams fit_minmax(std::span<const double> x) {
  require_non_empty(x);
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  NormParams p{NormMode::MinMax, *lo, *hi, false};
  p.degenerate = !(*hi > *lo);
  return p;
}

NormParams fit_zscore(std::span<const double> x) {
  require_non_empty(x);
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(x.size());
  NormParams p{NormMode::ZScore, mean, std::sqrt(var), false};
  // A constant sequence can leave rounding residue in var; the min/max test is exact.
  p.degenerate = !(*hi > *lo) || !(p.second > 0.0);
  if (p.degenerate) p.second = 0.0;
  return p;
}

std::vector<double> apply(const NormParams& p, std::span<const double> x) {
  std::vector<double> out(x.size(), 0.0);
  if (p.degenerate) return out;
  if (p.mode == NormMode::MinMax) {
    const double range = p.second - p.first;
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - p.first) / range;
  } else {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - p.first) / p.second;
  }
  return out;
}

std::vector<double> invert(const NormParams& p, std::span<const double> y) {
  if (p.degenerate) throw DataError("cannot invert degenerate normalization");
  std::vector<double> out(y.size());
  if (p.mode == NormMode::MinMax) {
    const double range = p.second - p.first;
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] * range + p.first;
  } else {
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] * p.second + p.first;
  }
  return out;
}

Normalized minmax_normalize(std::span<const double> x) {
  auto p = fit_minmax(x);
  return {dsp::apply(p, x), p};
}

Normalized zscore_normalize(std::span<const double> x, const std::optional<NormParams>& params) {
  require_non_empty(x);
  NormParams p = params ? *params : fit_zscore(x);
  if (p.mode != NormMode::ZScore) throw ConfigError("zscore_normalize given min-max parameters");
  return {dsp::apply(p, x), p};
}

const char* to_string(NormMode mode) { return mode == NormMode::MinMax ? "minmax" : "zscore"; }

NormMode norm_mode_from_string(const std::string& name) {
  if (name == "minmax") return NormMode::MinMax;
  if (name == "zscore") return NormMode::ZScore;
  throw ConfigError("unknown normalization mode '" + name + "' (expected minmax or zscore)");
}

nlohmann::json to_json(const NormParams& p) {
  nlohmann::json j{{"mode", to_string(p.mode)}, {"degenerate", p.degenerate}};
  if (p.mode == NormMode::MinMax) {
    j["x_min"] = p.first;
    j["x_max"] = p.second;
  } else {
    j["mean"] = p.first;
    j["std"] = p.second;
  }
  return j;
}

NormParams norm_params_from_json(const nlohmann::json& j) {
  using namespace json_fields;
  NormParams p;
  p.mode = norm_mode_from_string(require<std::string>(j, "norm.", "mode"));
  p.degenerate = get_or<bool>(j, "norm.", "degenerate", false);
  if (p.mode == NormMode::MinMax) {
    p.first = require<double>(j, "norm.", "x_min");
    p.second = require<double>(j, "norm.", "x_max");
    if (p.second < p.first) throw ConfigError("norm: x_max must be >= x_min");
  } else {
    p.first = require<double>(j, "norm.", "mean");
    p.second = require<double>(j, "norm.", "std");
    if (p.second < 0.0) throw ConfigError("norm: std must be >= 0");
  }
  return p;
}

}  // namespace magclimb::dsp
