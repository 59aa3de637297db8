#include "magclimb/models/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "magclimb/common/errors.hpp"
#include "magclimb/common/json_fields.hpp"
#include "magclimb/common/rng.hpp"
#include "magclimb/neural/adam.hpp"
#include "magclimb/neural/loss.hpp"

namespace magclimb::models {

using neural::Mode;
using neural::Shape3;
using neural::Tensor;

void validate(const TrainConfig& c) {
  if (!(c.lr > 0.0)) throw ConfigError("lr must be positive");
  if (c.batch == 0) throw ConfigError("batch must be >= 1");
  if (c.epochs == 0) throw ConfigError("epochs must be >= 1");
  if (!(c.validation_fraction >= 0.0 && c.validation_fraction < 1.0)) {
    throw ConfigError("validation_fraction must lie in [0, 1)");
  }
}

namespace {

constexpr std::size_t kPredictChunk = 256;

Tensor<float> gather(const Tensor<float>& inputs, const std::vector<std::size_t>& rows, std::size_t begin,
                     std::size_t end) {
  const Shape3 s = inputs.shape();
  const std::size_t stride = s.steps * s.channels;
  Tensor<float> out({end - begin, s.steps, s.channels});
  for (std::size_t i = begin; i < end; ++i) {
    std::copy_n(inputs.data() + rows[i] * stride, stride, out.data() + (i - begin) * stride);
  }
  return out;
}

Tensor<float> targets_for(const std::vector<HazardLabel>& labels, const std::vector<std::size_t>& rows,
                          std::size_t begin, std::size_t end, std::size_t classes) {
  Tensor<float> t({end - begin, 1, classes});
  for (std::size_t i = begin; i < end; ++i) t.at(i - begin, 0, index_of(labels[rows[i]])) = 1.0f;
  return t;
}

std::size_t correct_count(const Tensor<float>& probs, const std::vector<HazardLabel>& labels,
                          const std::vector<std::size_t>& rows, std::size_t begin) {
  const std::size_t c = probs.shape().channels;
  std::size_t hits = 0;
  for (std::size_t b = 0; b < probs.shape().batch; ++b) {
    const std::span<const float> row(probs.data() + b * c, c);
    if (argmax(row) == index_of(labels[rows[begin + b]])) ++hits;
  }
  return hits;
}

struct Score {
  double loss = 0.0;
  double accuracy = 0.0;
};

Score score(neural::ModelGraph<float>& model, const Tensor<float>& inputs, const std::vector<HazardLabel>& labels,
            const std::vector<std::size_t>& rows) {
  double loss = 0.0;
  std::size_t hits = 0;
  const std::size_t classes = model.output_shape().channels;
  for (std::size_t begin = 0; begin < rows.size(); begin += kPredictChunk) {
    const std::size_t end = std::min(rows.size(), begin + kPredictChunk);
    const auto probs = model.predict_proba(gather(inputs, rows, begin, end));
    loss += static_cast<double>(neural::cross_entropy(probs, targets_for(labels, rows, begin, end, classes))) *
            static_cast<double>(end - begin);
    hits += correct_count(probs, labels, rows, begin);
  }
  return {loss / static_cast<double>(rows.size()), static_cast<double>(hits) / static_cast<double>(rows.size())};
}

void shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace

HoldoutSplit validation_holdout(const std::vector<HazardLabel>& labels, double fraction, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0x5A17);
  HoldoutSplit split;
  for (auto label : kAllLabels) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == label) members.push_back(i);
    }
    shuffle(members, rng);
    const auto hold = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(members.size())));
    split.validation.insert(split.validation.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(hold));
    split.train.insert(split.train.end(), members.begin() + static_cast<std::ptrdiff_t>(hold), members.end());
  }
  std::sort(split.validation.begin(), split.validation.end());
  std::sort(split.train.begin(), split.train.end());
  return split;
}

TrainHistory train(neural::ModelGraph<float>& model, const Tensor<float>& inputs,
                   const std::vector<HazardLabel>& labels, const TrainConfig& cfg) {
  validate(cfg);
  const std::size_t n = inputs.shape().batch;
  if (n == 0) throw DataError("training set is empty");
  if (labels.size() != n) throw DataError("training inputs and labels differ in count");
  if (!(inputs.shape().feature() == model.input_shape())) {
    throw ShapeError("training inputs " + neural::to_string(inputs.shape()) + " do not fit model input " +
                     neural::to_string(model.input_shape()));
  }
  const std::size_t classes = model.output_shape().channels;
  if (model.output_shape().steps != 1) throw ShapeError("model must end in one logit row per sample");

  auto [train_rows, val_rows] = validation_holdout(labels, cfg.validation_fraction, cfg.seed);
  if (train_rows.empty()) throw DataError("validation carve left no training samples");

  TrainHistory history;
  history.train_count = train_rows.size();
  history.val_count = val_rows.size();
  if (val_rows.empty()) history.monitored = "train_loss";

  model.reseed_dropout(derive_seed(cfg.seed, 0xD20));
  Rng order_rng = make_rng(cfg.seed, 0x0DE5);
  neural::AdamState<float> adam;
  adam.config.lr = cfg.lr;
  auto params = model.params();

  double best = std::numeric_limits<double>::infinity();
  std::vector<std::vector<float>> best_params = model.snapshot();
  std::size_t wait = 0;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle(train_rows, order_rng);
    double loss_sum = 0.0;
    std::size_t hits = 0;
    std::size_t batch_index = 0;
    for (std::size_t begin = 0; begin < train_rows.size(); begin += cfg.batch, ++batch_index) {
      const std::size_t end = std::min(train_rows.size(), begin + cfg.batch);
      const auto x = gather(inputs, train_rows, begin, end);
      const auto y = targets_for(labels, train_rows, begin, end, classes);
      model.zero_grad();
      const auto probs = neural::softmax(model.forward(x, Mode::Train));
      const double loss = neural::cross_entropy(probs, y);
      if (!std::isfinite(loss)) {
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                            std::to_string(batch_index));
      }
      model.backward(neural::softmax_cross_entropy_grad(probs, y));
      neural::adam_step(params, adam);
      loss_sum += loss * static_cast<double>(end - begin);
      hits += correct_count(probs, labels, train_rows, begin);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(train_rows.size());
    rec.train_accuracy = static_cast<double>(hits) / static_cast<double>(train_rows.size());
    if (!val_rows.empty()) {
      const Score s = score(model, inputs, labels, val_rows);
      rec.val_loss = s.loss;
      rec.val_accuracy = s.accuracy;
    } else {
      rec.val_loss = rec.train_loss;
      rec.val_accuracy = rec.train_accuracy;
    }
    if (!std::isfinite(rec.val_loss)) {
      throw TrainingError("non-finite validation loss at epoch " + std::to_string(epoch));
    }
    history.epochs.push_back(rec);

    if (rec.val_loss < best) {
      best = rec.val_loss;
      best_params = model.snapshot();
      history.best_epoch = epoch;
      wait = 0;
      if (!cfg.checkpoint_path.empty()) model.save(cfg.checkpoint_path);
    } else if (++wait >= std::max<std::size_t>(cfg.patience, 1)) {
      history.stopped_early = epoch < cfg.epochs;
      break;
    }
  }
  model.restore(best_params);
  history.best_val_loss = best;
  return history;
}

std::vector<HazardLabel> predict_labels(neural::ModelGraph<float>& model, const Tensor<float>& inputs) {
  const std::size_t n = inputs.shape().batch;
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  std::vector<HazardLabel> out;
  out.reserve(n);
  for (std::size_t begin = 0; begin < n; begin += kPredictChunk) {
    const std::size_t end = std::min(n, begin + kPredictChunk);
    const auto probs = model.predict_proba(gather(inputs, rows, begin, end));
    const std::size_t c = probs.shape().channels;
    for (std::size_t b = 0; b < probs.shape().batch; ++b) {
      out.push_back(label_from_index(static_cast<long long>(argmax(std::span<const float>(probs.data() + b * c, c)))));
    }
  }
  return out;
}

Tensor<float> windows_to_tensor(const std::vector<std::vector<double>>& windows) {
  if (windows.empty()) return Tensor<float>({0, 1, 1});
  const std::size_t len = windows.front().size();
  Tensor<float> t({windows.size(), len, 1});
  for (std::size_t i = 0; i < windows.size(); ++i) {
    if (windows[i].size() != len) throw DataError("windows have different lengths");
    for (std::size_t j = 0; j < len; ++j) t.data()[i * len + j] = static_cast<float>(windows[i][j]);
  }
  return t;
}

Tensor<float> features_to_tensor(const std::vector<FeatureVector>& rows) {
  Tensor<float> t({rows.size(), 1, kFeatureCount});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < kFeatureCount; ++j) t.data()[i * kFeatureCount + j] = static_cast<float>(rows[i][j]);
  }
  return t;
}

nlohmann::json to_json(const TrainHistory& h) {
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : h.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"train_loss", e.train_loss},
                      {"train_accuracy", e.train_accuracy},
                      {"val_loss", e.val_loss},
                      {"val_accuracy", e.val_accuracy}});
  }
  return {{"epochs", epochs},           {"best_epoch", h.best_epoch}, {"best_val_loss", h.best_val_loss},
          {"stopped_early", h.stopped_early}, {"train_count", h.train_count}, {"val_count", h.val_count},
          {"monitored", h.monitored}};
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"lr", c.lr},
          {"batch", c.batch},
          {"epochs", c.epochs},
          {"patience", c.patience},
          {"seed", c.seed},
          {"validation_fraction", c.validation_fraction}};
}

TrainConfig train_config_from_json(const nlohmann::json& j, const TrainConfig& d) {
  using json_fields::get_or;
  json_fields::expect_object(j, "train");
  json_fields::reject_unknown(j, "train.", {"lr", "batch", "epochs", "patience", "seed", "validation_fraction"});
  TrainConfig c = d;
  c.lr = get_or<double>(j, "train.", "lr", d.lr);
  c.batch = get_or<std::size_t>(j, "train.", "batch", d.batch);
  c.epochs = get_or<std::size_t>(j, "train.", "epochs", d.epochs);
  c.patience = get_or<std::size_t>(j, "train.", "patience", d.patience);
  c.seed = get_or<std::uint64_t>(j, "train.", "seed", d.seed);
  c.validation_fraction = get_or<double>(j, "train.", "validation_fraction", d.validation_fraction);
  validate(c);
  return c;
}

}  // namespace magclimb::models
