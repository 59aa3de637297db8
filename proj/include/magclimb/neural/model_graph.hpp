// A feed-forward stack of layers producing class logits, plus persistence as a JSON
// manifest and a flat little-endian float32 blob.
#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "magclimb/neural/layers.hpp"

namespace magclimb::neural {

template <typename T>
class ModelGraph {
 public:
  ModelGraph() = default;
  ModelGraph(std::string name, FeatureShape input);

  ModelGraph(const ModelGraph& other);
  ModelGraph& operator=(const ModelGraph& other);
  ModelGraph(ModelGraph&&) noexcept = default;
  ModelGraph& operator=(ModelGraph&&) noexcept = default;

  /// Appends a layer after checking that the running output shape can feed it.
  Layer<T>& add(std::unique_ptr<Layer<T>> layer);

  template <typename L, typename... Args>
  L& emplace(Args&&... args) {
    return static_cast<L&>(add(std::make_unique<L>(std::forward<Args>(args)...)));
  }

  const std::string& name() const { return name_; }
  FeatureShape input_shape() const { return input_; }
  /// Per-sample output shape of the last layer (the input shape for an empty graph).
  FeatureShape output_shape() const { return output_; }
  std::size_t layer_count() const { return layers_.size(); }
  Layer<T>& layer(std::size_t i) { return *layers_.at(i); }
  const Layer<T>& layer(std::size_t i) const { return *layers_.at(i); }

  /// Logits for a batch; the input must match input_shape().
  Tensor<T> forward(const Tensor<T>& x, Mode mode);
  /// Propagates d(loss)/d(logits) back through every layer; returns d(loss)/d(input).
  Tensor<T> backward(const Tensor<T>& grad_logits);
  /// Class probabilities in inference mode.
  Tensor<T> predict_proba(const Tensor<T>& x);

  std::vector<Param<T>*> params();
  std::size_t parameter_count() const;
  void zero_grad();

  /// Re-initializes every layer from streams derived from `seed` and the layer index,
  /// and reseeds dropout masks.
  void initialize(std::uint64_t seed);
  void reseed_dropout(std::uint64_t seed);
  void freeze_dropout(bool frozen);

  std::vector<std::vector<T>> snapshot();
  void restore(const std::vector<std::vector<T>>& values);

  /// Free-form provenance (training config, label names) stored in the manifest.
  nlohmann::json& metadata() { return metadata_; }
  const nlohmann::json& metadata() const { return metadata_; }

  nlohmann::json manifest(const std::string& blob_name) const;
  std::vector<std::uint8_t> blob() const;
  static ModelGraph from_manifest(const nlohmann::json& manifest, std::span<const std::uint8_t> blob);

  /// Writes `<path>` (manifest) and `<path stem>.bin` (blob), each atomically.
  void save(const std::filesystem::path& manifest_path) const;
  static ModelGraph load(const std::filesystem::path& manifest_path);

 private:
  std::string name_;
  FeatureShape input_;
  FeatureShape output_;
  std::vector<std::unique_ptr<Layer<T>>> layers_;
  nlohmann::json metadata_ = nlohmann::json::object();
};

}  // namespace magclimb::neural
