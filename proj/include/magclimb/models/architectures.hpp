#pragma once

#include <cstddef>

#include <json.hpp>

#include "magclimb/models/labels.hpp"
#include "magclimb/neural/model_graph.hpp"

namespace magclimb::models {

/// Conv blocks [conv -> adaptive ReLU -> max-pool -> dropout] feeding an LSTM whose full
/// output sequence is flattened into a dense classifier.
struct IcnnLstmConfig {
  std::size_t conv_blocks = 2;
  std::size_t filters = 64;
  std::size_t kernel = 3;
  std::size_t pool_window = 2;  ///< 1 disables pooling
  double dropout_rate = 0.2;
  std::size_t lstm_hidden = 64;
  std::size_t classes = kClassCount;
  std::size_t window_length = 128;
  std::size_t input_channels = 1;
};

struct LstmBaselineConfig {
  std::size_t layers = 3;
  std::size_t hidden = 32;
  std::size_t dense_units = 32;
  std::size_t classes = kClassCount;
  std::size_t window_length = 128;
  std::size_t input_channels = 1;
};

struct RnnBaselineConfig {
  std::size_t layers = 2;
  std::size_t hidden = 32;
  std::size_t dense_units = 32;
  std::size_t truncation = 0;  ///< BPTT chunk length; 0 = full window
  std::size_t classes = kClassCount;
  std::size_t window_length = 128;
  std::size_t input_channels = 1;
};

struct BpBaselineConfig {
  std::size_t hidden_layers = 2;
  std::size_t hidden_units = 100;
  std::size_t inputs = 5;
  std::size_t classes = kClassCount;
};

void validate(const IcnnLstmConfig& cfg);
void validate(const LstmBaselineConfig& cfg);
void validate(const RnnBaselineConfig& cfg);
void validate(const BpBaselineConfig& cfg);

/// Shortest window the conv/pool stack accepts: pool_window ^ conv_blocks.
std::size_t minimum_window_length(const IcnnLstmConfig& cfg);

/// Throws ShapeError naming the minimum length when the window is too short.
template <typename T>
neural::ModelGraph<T> build_icnn_lstm(const IcnnLstmConfig& cfg, std::uint64_t seed);
template <typename T>
neural::ModelGraph<T> build_lstm_baseline(const LstmBaselineConfig& cfg, std::uint64_t seed);
template <typename T>
neural::ModelGraph<T> build_rnn_baseline(const RnnBaselineConfig& cfg, std::uint64_t seed);
template <typename T>
neural::ModelGraph<T> build_bp_baseline(const BpBaselineConfig& cfg, std::uint64_t seed);

nlohmann::json to_json(const IcnnLstmConfig& cfg);
IcnnLstmConfig icnn_config_from_json(const nlohmann::json& j, const IcnnLstmConfig& defaults = {});

}  // namespace magclimb::models
