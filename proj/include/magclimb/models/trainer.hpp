// Mini-batch Adam training with a stratified validation carve and early stopping.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "magclimb/models/features.hpp"
#include "magclimb/models/labels.hpp"
#include "magclimb/neural/model_graph.hpp"

namespace magclimb::models {

struct TrainConfig {
  double lr = 1e-3;
  std::size_t batch = 32;
  std::size_t epochs = 30;
  std::size_t patience = 5;
  std::uint64_t seed = 0;
  /// Share of each class held out of the training data to drive early stopping.
  double validation_fraction = 0.15;
  /// When set, the best model so far is saved here (manifest path) after each improvement.
  std::string checkpoint_path;
};

void validate(const TrainConfig& cfg);

struct EpochRecord {
  std::size_t epoch = 0;  ///< 1-based
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;  ///< 1-based epoch whose parameters were restored
  double best_val_loss = 0.0;
  bool stopped_early = false;
  std::size_t train_count = 0;
  std::size_t val_count = 0;
  /// "val_loss", or "train_loss" when the validation carve came out empty.
  std::string monitored = "val_loss";
};

struct HoldoutSplit {
  std::vector<std::size_t> train;  ///< ascending sample indices
  std::vector<std::size_t> validation;
};

/// Holds out floor(fraction * class count) samples of every class, chosen by a seeded shuffle.
HoldoutSplit validation_holdout(const std::vector<HazardLabel>& labels, double fraction, std::uint64_t seed);

/// Trains in place and restores the parameters of the epoch with the lowest monitored loss.
/// Stops once `patience` consecutive epochs fail to improve it (patience 0 behaves like 1).
/// Throws DataError for empty data and TrainingError, naming epoch and batch, when the loss
/// becomes non-finite.
TrainHistory train(neural::ModelGraph<float>& model, const neural::Tensor<float>& inputs,
                   const std::vector<HazardLabel>& labels, const TrainConfig& cfg);

/// Arg-max class per sample, inference mode, evaluated in chunks.
std::vector<HazardLabel> predict_labels(neural::ModelGraph<float>& model, const neural::Tensor<float>& inputs);

/// Windows as a (count x length x 1) tensor.
neural::Tensor<float> windows_to_tensor(const std::vector<std::vector<double>>& windows);
/// Feature rows as a (count x 1 x 5) tensor.
neural::Tensor<float> features_to_tensor(const std::vector<FeatureVector>& rows);

nlohmann::json to_json(const TrainHistory& h);
nlohmann::json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j, const TrainConfig& defaults = {});

}  // namespace magclimb::models
