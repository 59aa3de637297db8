#include "magclimb/models/architectures.hpp"

#include "magclimb/common/errors.hpp"
#include "magclimb/common/json_fields.hpp"

namespace magclimb::models {

using namespace neural;

namespace {

void require_positive(std::size_t v, const char* what) {
  if (v == 0) throw ConfigError(std::string(what) + " must be >= 1");
}

}  // namespace

void validate(const IcnnLstmConfig& c) {
  require_positive(c.conv_blocks, "conv_blocks");
  require_positive(c.filters, "filters");
  require_positive(c.kernel, "kernel");
  require_positive(c.pool_window, "pool_window");
  require_positive(c.lstm_hidden, "lstm_hidden");
  require_positive(c.classes, "classes");
  require_positive(c.window_length, "window_length");
  require_positive(c.input_channels, "input_channels");
  if (!(c.dropout_rate >= 0.0 && c.dropout_rate < 1.0)) throw ConfigError("dropout_rate must lie in [0, 1)");
}

void validate(const LstmBaselineConfig& c) {
  require_positive(c.layers, "layers");
  require_positive(c.hidden, "hidden");
  require_positive(c.dense_units, "dense_units");
  require_positive(c.classes, "classes");
  require_positive(c.window_length, "window_length");
  require_positive(c.input_channels, "input_channels");
}

void validate(const RnnBaselineConfig& c) {
  require_positive(c.layers, "layers");
  require_positive(c.hidden, "hidden");
  require_positive(c.dense_units, "dense_units");
  require_positive(c.classes, "classes");
  require_positive(c.window_length, "window_length");
  require_positive(c.input_channels, "input_channels");
}

void validate(const BpBaselineConfig& c) {
  require_positive(c.hidden_layers, "hidden_layers");
  require_positive(c.hidden_units, "hidden_units");
  require_positive(c.inputs, "inputs");
  require_positive(c.classes, "classes");
}

std::size_t minimum_window_length(const IcnnLstmConfig& cfg) {
  std::size_t n = 1;
  for (std::size_t b = 0; b < cfg.conv_blocks; ++b) n *= cfg.pool_window;
  return n;
}

template <typename T>
ModelGraph<T> build_icnn_lstm(const IcnnLstmConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  if (cfg.window_length < minimum_window_length(cfg)) {
    throw ShapeError("window length " + std::to_string(cfg.window_length) + " is too short for " +
                     std::to_string(cfg.conv_blocks) + " pooling stages of " + std::to_string(cfg.pool_window) +
                     "; minimum length is " + std::to_string(minimum_window_length(cfg)));
  }
  ModelGraph<T> g("icnn_lstm", {cfg.window_length, cfg.input_channels});
  std::size_t channels = cfg.input_channels;
  for (std::size_t b = 0; b < cfg.conv_blocks; ++b) {
    g.template emplace<Conv1D<T>>(channels, cfg.filters, cfg.kernel, Padding::Same);
    g.template emplace<AdaptiveRelu<T>>(cfg.filters);
    g.template emplace<MaxPool1D<T>>(cfg.pool_window);
    g.template emplace<Dropout<T>>(cfg.dropout_rate);
    channels = cfg.filters;
  }
  g.template emplace<Lstm<T>>(channels, cfg.lstm_hidden, true);
  const FeatureShape seq = g.output_shape();
  g.template emplace<Flatten<T>>();
  g.template emplace<Dense<T>>(seq.steps * seq.channels, cfg.classes);
  g.initialize(seed);
  return g;
}

template <typename T>
ModelGraph<T> build_lstm_baseline(const LstmBaselineConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  ModelGraph<T> g("lstm", {cfg.window_length, cfg.input_channels});
  std::size_t channels = cfg.input_channels;
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    g.template emplace<Lstm<T>>(channels, cfg.hidden, l + 1 < cfg.layers);
    channels = cfg.hidden;
  }
  g.template emplace<Dense<T>>(cfg.hidden, cfg.dense_units);
  g.template emplace<Relu<T>>();
  g.template emplace<Dense<T>>(cfg.dense_units, cfg.classes);
  g.initialize(seed);
  return g;
}

template <typename T>
ModelGraph<T> build_rnn_baseline(const RnnBaselineConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  ModelGraph<T> g("rnn", {cfg.window_length, cfg.input_channels});
  std::size_t channels = cfg.input_channels;
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    g.template emplace<SimpleRnn<T>>(channels, cfg.hidden, l + 1 < cfg.layers, cfg.truncation);
    channels = cfg.hidden;
  }
  g.template emplace<Dense<T>>(cfg.hidden, cfg.dense_units);
  g.template emplace<Relu<T>>();
  g.template emplace<Dense<T>>(cfg.dense_units, cfg.classes);
  g.initialize(seed);
  return g;
}

template <typename T>
ModelGraph<T> build_bp_baseline(const BpBaselineConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  ModelGraph<T> g("bp", {1, cfg.inputs});
  std::size_t width = cfg.inputs;
  for (std::size_t l = 0; l < cfg.hidden_layers; ++l) {
    g.template emplace<Dense<T>>(width, cfg.hidden_units);
    g.template emplace<Relu<T>>();
    width = cfg.hidden_units;
  }
  g.template emplace<Dense<T>>(width, cfg.classes);
  g.initialize(seed);
  return g;
}

nlohmann::json to_json(const IcnnLstmConfig& c) {
  return {{"conv_blocks", c.conv_blocks}, {"filters", c.filters},         {"kernel", c.kernel},
          {"pool_window", c.pool_window}, {"dropout_rate", c.dropout_rate}, {"lstm_hidden", c.lstm_hidden},
          {"classes", c.classes},         {"window_length", c.window_length}, {"input_channels", c.input_channels}};
}

IcnnLstmConfig icnn_config_from_json(const nlohmann::json& j, const IcnnLstmConfig& d) {
  using json_fields::get_or;
  json_fields::expect_object(j, "icnn");
  json_fields::reject_unknown(j, "icnn.",
                              {"conv_blocks", "filters", "kernel", "pool_window", "dropout_rate", "lstm_hidden",
                               "classes", "window_length", "input_channels"});
  IcnnLstmConfig c;
  c.conv_blocks = get_or<std::size_t>(j, "icnn.", "conv_blocks", d.conv_blocks);
  c.filters = get_or<std::size_t>(j, "icnn.", "filters", d.filters);
  c.kernel = get_or<std::size_t>(j, "icnn.", "kernel", d.kernel);
  c.pool_window = get_or<std::size_t>(j, "icnn.", "pool_window", d.pool_window);
  c.dropout_rate = get_or<double>(j, "icnn.", "dropout_rate", d.dropout_rate);
  c.lstm_hidden = get_or<std::size_t>(j, "icnn.", "lstm_hidden", d.lstm_hidden);
  c.classes = get_or<std::size_t>(j, "icnn.", "classes", d.classes);
  c.window_length = get_or<std::size_t>(j, "icnn.", "window_length", d.window_length);
  c.input_channels = get_or<std::size_t>(j, "icnn.", "input_channels", d.input_channels);
  validate(c);
  return c;
}

#define MAGCLIMB_INSTANTIATE_BUILDERS(T)                                              \
  template ModelGraph<T> build_icnn_lstm<T>(const IcnnLstmConfig&, std::uint64_t);    \
  template ModelGraph<T> build_lstm_baseline<T>(const LstmBaselineConfig&, std::uint64_t); \
  template ModelGraph<T> build_rnn_baseline<T>(const RnnBaselineConfig&, std::uint64_t);   \
  template ModelGraph<T> build_bp_baseline<T>(const BpBaselineConfig&, std::uint64_t);

MAGCLIMB_INSTANTIATE_BUILDERS(float)
MAGCLIMB_INSTANTIATE_BUILDERS(double)

}  // namespace magclimb::models
