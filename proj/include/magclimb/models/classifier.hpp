// Uniform fit/predict/save interface over the six classifier families.
#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "magclimb/models/architectures.hpp"
#include "magclimb/models/labels.hpp"
#include "magclimb/models/random_forest.hpp"
#include "magclimb/models/trainer.hpp"

namespace magclimb::models {

enum class ModelKind { IcnnLstm, Lstm, Rnn, Bp, Rf, Knn };

inline constexpr ModelKind kAllModelKinds[] = {ModelKind::IcnnLstm, ModelKind::Lstm, ModelKind::Rnn,
                                               ModelKind::Bp,       ModelKind::Rf,   ModelKind::Knn};

/// "icnn_lstm", "lstm", "rnn", "bp", "rf", "knn".
const char* to_string(ModelKind kind);
/// Throws ConfigError listing the accepted names.
ModelKind model_kind_from_string(const std::string& name);
/// True for models that read raw windows; the others read sliding-window features.
bool consumes_sequences(ModelKind kind);

struct ClassifierOptions {
  IcnnLstmConfig icnn;
  LstmBaselineConfig lstm;
  RnnBaselineConfig rnn;
  BpBaselineConfig bp;
  RfConfig rf;
  std::size_t knn_k = 5;
  TrainConfig train;
};

nlohmann::json to_json(const ClassifierOptions& o);

class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual ModelKind kind() const = 0;
  /// Fits from scratch; every random choice derives from `seed`. Returns the training
  /// history for gradient-trained models.
  virtual std::optional<TrainHistory> fit(const WindowSet& train, std::uint64_t seed) = 0;
  virtual std::vector<HazardLabel> predict(const std::vector<std::vector<double>>& windows) = 0;
  /// Writes a JSON manifest at `path` (plus a `.bin` blob for neural models).
  virtual void save(const std::filesystem::path& path) const = 0;
};

/// Window length only matters for the sequence models; it sizes their input layer.
std::unique_ptr<Classifier> make_classifier(ModelKind kind, const ClassifierOptions& options,
                                            std::size_t window_length);
std::unique_ptr<Classifier> load_classifier(const std::filesystem::path& path);

}  // namespace magclimb::models
