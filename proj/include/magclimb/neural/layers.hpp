// Layers with analytic backward passes. Every layer caches what its backward pass needs
// during forward(); backward() accumulates parameter gradients into Param::grad and returns
// the gradient with respect to the layer input.
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "magclimb/common/rng.hpp"
#include "magclimb/neural/tensor.hpp"

namespace magclimb::neural {

enum class Padding { Valid, Same };

const char* to_string(Padding p);
Padding padding_from_string(const std::string& name);

template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;

  virtual std::string kind() const = 0;
  /// Per-sample output shape; throws ShapeError when the input cannot feed this layer.
  virtual FeatureShape output_shape(FeatureShape in) const = 0;
  virtual Tensor<T> forward(const Tensor<T>& x, Mode mode) = 0;
  virtual Tensor<T> backward(const Tensor<T>& grad_out) = 0;
  virtual std::vector<Param<T>*> params() { return {}; }
  /// Hyperparameters sufficient to rebuild the layer (parameters excluded).
  virtual nlohmann::json config() const = 0;
  virtual void initialize(Rng& /*rng*/) {}
  virtual std::unique_ptr<Layer<T>> clone() const = 0;
};

/// 1-D cross-correlation (kernel not flipped): y[t, o] = b[o] + sum_{c,k} W[o, c, k] x[t + k - pad, c].
template <typename T>
class Conv1D final : public Layer<T> {
 public:
  Conv1D(std::size_t in_channels, std::size_t out_channels, std::size_t width, Padding padding);

  std::string kind() const override { return "conv1d"; }
  FeatureShape output_shape(FeatureShape in) const override;
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  std::vector<Param<T>*> params() override { return {&kernel_, &bias_}; }
  nlohmann::json config() const override;
  void initialize(Rng& rng) override;
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Conv1D>(*this); }

  Param<T>& kernel() { return kernel_; }  ///< out x in x width
  Param<T>& bias() { return bias_; }

 private:
  std::size_t in_, out_, width_;
  Padding padding_;
  Param<T> kernel_, bias_;
  Shape3 in_shape_;
  RowMatrix<T> cols_;
};

/// max(0, z) + alpha_c min(0, z) with one learnable slope per channel.
template <typename T>
class AdaptiveRelu final : public Layer<T> {
 public:
  explicit AdaptiveRelu(std::size_t channels, T initial_alpha = T(0.25));

  std::string kind() const override { return "adaptive_relu"; }
  FeatureShape output_shape(FeatureShape in) const override;
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  std::vector<Param<T>*> params() override { return {&alpha_}; }
  nlohmann::json config() const override;
  void initialize(Rng& rng) override;
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<AdaptiveRelu>(*this); }

  Param<T>& alpha() { return alpha_; }

 private:
  std::size_t channels_;
  T initial_alpha_;
  Param<T> alpha_;
  Tensor<T> input_;
};

/// Non-overlapping max over `window` steps; a trailing partial window is dropped.
/// Backward routes each gradient to the first maximal position.
template <typename T>
class MaxPool1D final : public Layer<T> {
 public:
  explicit MaxPool1D(std::size_t window);

  std::string kind() const override { return "maxpool1d"; }
  FeatureShape output_shape(FeatureShape in) const override;
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  nlohmann::json config() const override { return {{"window", window_}}; }
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<MaxPool1D>(*this); }

 private:
  std::size_t window_;
  Shape3 in_shape_;
  std::vector<std::size_t> argmax_;
};

/// Inverted dropout: in training each value survives with probability 1 - rate and is
/// scaled by 1 / (1 - rate); inference is the identity.
template <typename T>
class Dropout final : public Layer<T> {
 public:
  explicit Dropout(double rate, std::uint64_t seed = 0);

  std::string kind() const override { return "dropout"; }
  FeatureShape output_shape(FeatureShape in) const override { return in; }
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  nlohmann::json config() const override { return {{"rate", rate_}}; }
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Dropout>(*this); }

  void reseed(std::uint64_t seed) { rng_.seed(seed); }
  /// While frozen, training-mode calls reuse the last mask (for finite-difference checks).
  void freeze_mask(bool frozen) { frozen_ = frozen; }
  double rate() const { return rate_; }

 private:
  double rate_;
  Rng rng_;
  bool frozen_ = false;
  std::vector<T> mask_;  ///< empty means identity
};

/// Affine map applied independently at every time step: y = W x + b, W is out x in.
template <typename T>
class Dense final : public Layer<T> {
 public:
  Dense(std::size_t in_features, std::size_t out_features);

  std::string kind() const override { return "dense"; }
  FeatureShape output_shape(FeatureShape in) const override;
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  std::vector<Param<T>*> params() override { return {&weight_, &bias_}; }
  nlohmann::json config() const override { return {{"in", in_}, {"out", out_}}; }
  void initialize(Rng& rng) override;
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Dense>(*this); }

  Param<T>& weight() { return weight_; }
  Param<T>& bias() { return bias_; }

 private:
  std::size_t in_, out_;
  Param<T> weight_, bias_;
  Tensor<T> input_;
};

template <typename T>
class Relu final : public Layer<T> {
 public:
  std::string kind() const override { return "relu"; }
  FeatureShape output_shape(FeatureShape in) const override { return in; }
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  nlohmann::json config() const override { return nlohmann::json::object(); }
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Relu>(*this); }

 private:
  Tensor<T> input_;
};

/// (steps, channels) -> (1, steps * channels), preserving memory order.
template <typename T>
class Flatten final : public Layer<T> {
 public:
  std::string kind() const override { return "flatten"; }
  FeatureShape output_shape(FeatureShape in) const override { return {1, in.steps * in.channels}; }
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  nlohmann::json config() const override { return nlohmann::json::object(); }
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Flatten>(*this); }

 private:
  Shape3 in_shape_;
};

/// Gate parameters of one LSTM layer. Columns of the (.. x 4H) matrices are laid out as
/// [forget | input | output | candidate].
template <typename T>
struct LstmParams {
  Param<T> input_weights;      ///< I x 4H
  Param<T> recurrent_weights;  ///< H x 4H
  Param<T> bias;               ///< 4H

  LstmParams(std::size_t input, std::size_t hidden);
  std::size_t hidden() const { return recurrent_weights.dims[0]; }
  std::size_t input() const { return input_weights.dims[0]; }
};

template <typename T>
struct LstmState {
  RowMatrix<T> h;  ///< batch x hidden
  RowMatrix<T> c;  ///< batch x hidden

  static LstmState zeros(std::size_t batch, std::size_t hidden);
};

/// Gate activations of one step, kept for inspection.
template <typename T>
struct LstmGates {
  RowMatrix<T> forget, input, output, candidate;
};

/// One cell update:
///   f, i, o = sigmoid(x Wx + h Wh + b),  c~ = tanh(...)
///   c_t = f * c_{t-1} + i * c~,  h_t = o * tanh(c_t).
template <typename T>
LstmState<T> lstm_step(const RowMatrix<T>& x_t, const LstmState<T>& prev, const LstmParams<T>& params,
                       LstmGates<T>* gates = nullptr);

template <typename T>
class Lstm final : public Layer<T> {
 public:
  Lstm(std::size_t input, std::size_t hidden, bool return_sequences);

  std::string kind() const override { return "lstm"; }
  FeatureShape output_shape(FeatureShape in) const override;
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  std::vector<Param<T>*> params() override {
    return {&p_.input_weights, &p_.recurrent_weights, &p_.bias};
  }
  nlohmann::json config() const override;
  void initialize(Rng& rng) override;
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Lstm>(*this); }

  LstmParams<T>& lstm_params() { return p_; }

 private:
  std::size_t input_, hidden_;
  bool return_sequences_;
  LstmParams<T> p_;
  Tensor<T> x_;
  RowMatrix<T> gates_;  ///< (B*T) x 4H activated gates, row b*T + t
  RowMatrix<T> cells_;  ///< (B*T) x H
  RowMatrix<T> tanh_c_; ///< (B*T) x H
  RowMatrix<T> states_; ///< (B*T) x H
};

/// Elman recurrence h_t = tanh(x_t Wx + h_{t-1} Wh + b). With truncation k > 0 the backward
/// pass stops the hidden-state gradient at every k-step chunk boundary.
template <typename T>
class SimpleRnn final : public Layer<T> {
 public:
  SimpleRnn(std::size_t input, std::size_t hidden, bool return_sequences, std::size_t truncation = 0);

  std::string kind() const override { return "rnn"; }
  FeatureShape output_shape(FeatureShape in) const override;
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  std::vector<Param<T>*> params() override { return {&wx_, &wh_, &bias_}; }
  nlohmann::json config() const override;
  void initialize(Rng& rng) override;
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<SimpleRnn>(*this); }

 private:
  std::size_t input_, hidden_;
  bool return_sequences_;
  std::size_t truncation_;
  Param<T> wx_, wh_, bias_;
  Tensor<T> x_;
  RowMatrix<T> states_;  ///< (B*T) x H
};

/// Rebuilds a layer from its kind and config().
template <typename T>
std::unique_ptr<Layer<T>> make_layer(const std::string& kind, const nlohmann::json& config);

// Functional forms over whole tensors, for direct use and tests.
template <typename T>
Tensor<T> conv1d(const Tensor<T>& x, const Tensor<T>& kernel_oiw, std::span<const T> bias, Padding padding);
template <typename T>
Tensor<T> adaptive_relu(const Tensor<T>& z, std::span<const T> alpha);
template <typename T>
Tensor<T> maxpool1d(const Tensor<T>& x, std::size_t window);
template <typename T>
Tensor<T> dropout(const Tensor<T>& x, double rate, Mode mode, std::uint64_t seed);
/// W is out x in, row-major.
template <typename T>
Tensor<T> dense(const Tensor<T>& x, std::span<const T> weight, std::span<const T> bias);

}  // namespace magclimb::neural
