#include "magclimb/neural/layers.hpp"

#include <algorithm>
#include <cmath>

#include "magclimb/common/errors.hpp"

namespace magclimb::neural {

std::string to_string(FeatureShape s) {
  return "(" + std::to_string(s.steps) + " x " + std::to_string(s.channels) + ")";
}

std::string to_string(Shape3 s) {
  return "(" + std::to_string(s.batch) + " x " + std::to_string(s.steps) + " x " + std::to_string(s.channels) + ")";
}

const char* to_string(Padding p) { return p == Padding::Same ? "same" : "valid"; }

Padding padding_from_string(const std::string& name) {
  if (name == "same") return Padding::Same;
  if (name == "valid") return Padding::Valid;
  throw ConfigError("unknown padding '" + name + "' (expected same or valid)");
}

namespace {

using Eigen::Index;

template <typename T>
void fill_uniform(std::vector<T>& v, double limit, Rng& rng) {
  for (auto& x : v) x = static_cast<T>((2.0 * uniform01(rng) - 1.0) * limit);
}

template <typename T>
void fill_glorot(std::vector<T>& v, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  fill_uniform(v, std::sqrt(6.0 / static_cast<double>(fan_in + fan_out)), rng);
}

template <typename T>
T sigmoid(T v) {
  if (v >= T(0)) return T(1) / (T(1) + std::exp(-v));
  const T e = std::exp(v);
  return e / (T(1) + e);
}

template <typename T>
Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>> row_vector(const std::vector<T>& v) {
  return {v.data(), static_cast<Index>(v.size())};
}

template <typename T>
Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>> row_vector(std::vector<T>& v) {
  return {v.data(), static_cast<Index>(v.size())};
}

void expect_channels(const char* layer, std::size_t got, std::size_t want) {
  if (got != want) {
    throw ShapeError(std::string(layer) + " expects " + std::to_string(want) + " input channels, got " +
                     std::to_string(got));
  }
}

void expect_same_shape(const char* layer, Shape3 got, Shape3 want) {
  if (!(got == want)) {
    throw ShapeError(std::string(layer) + " backward got gradient " + to_string(got) + ", expected " +
                     to_string(want));
  }
}

}  // namespace

// ---------------------------------------------------------------------------------------
// Conv1D

template <typename T>
Conv1D<T>::Conv1D(std::size_t in_channels, std::size_t out_channels, std::size_t width, Padding padding)
    : in_(in_channels),
      out_(out_channels),
      width_(width),
      padding_(padding),
      kernel_("kernel", {out_channels, in_channels, width}),
      bias_("bias", {out_channels}) {
  if (in_ == 0 || out_ == 0 || width_ == 0) throw ConfigError("conv1d needs positive channels and width");
}

template <typename T>
FeatureShape Conv1D<T>::output_shape(FeatureShape in) const {
  expect_channels("conv1d", in.channels, in_);
  if (padding_ == Padding::Same) return {in.steps, out_};
  if (in.steps < width_) {
    throw ShapeError("conv1d width " + std::to_string(width_) + " exceeds input length " + std::to_string(in.steps));
  }
  return {in.steps - width_ + 1, out_};
}

template <typename T>
Tensor<T> Conv1D<T>::forward(const Tensor<T>& x, Mode) {
  const Shape3 s = x.shape();
  const FeatureShape o = output_shape(s.feature());
  const std::size_t pad = padding_ == Padding::Same ? (width_ - 1) / 2 : 0;
  const std::size_t ck = in_ * width_;
  in_shape_ = s;
  cols_.setZero(static_cast<Index>(s.batch * o.steps), static_cast<Index>(ck));
  for (std::size_t b = 0; b < s.batch; ++b) {
    for (std::size_t t = 0; t < o.steps; ++t) {
      T* row = cols_.data() + (b * o.steps + t) * ck;
      for (std::size_t k = 0; k < width_; ++k) {
        const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t + k) - static_cast<std::ptrdiff_t>(pad);
        if (src < 0 || src >= static_cast<std::ptrdiff_t>(s.steps)) continue;
        const T* xin = x.data() + (b * s.steps + static_cast<std::size_t>(src)) * in_;
        for (std::size_t c = 0; c < in_; ++c) row[c * width_ + k] = xin[c];
      }
    }
  }
  Tensor<T> y({s.batch, o.steps, out_});
  auto ym = y.matrix();
  ym.noalias() = cols_ * kernel_.value_matrix(out_, ck).transpose();
  ym.rowwise() += row_vector(bias_.value);
  debug_check_finite(y, "conv1d");
  return y;
}

template <typename T>
Tensor<T> Conv1D<T>::backward(const Tensor<T>& grad_out) {
  const Shape3 s = in_shape_;
  const std::size_t out_steps = static_cast<std::size_t>(cols_.rows()) / std::max<std::size_t>(s.batch, 1);
  expect_same_shape("conv1d", grad_out.shape(), {s.batch, out_steps, out_});
  const std::size_t pad = padding_ == Padding::Same ? (width_ - 1) / 2 : 0;
  const std::size_t ck = in_ * width_;
  const auto g = grad_out.matrix();
  kernel_.grad_matrix(out_, ck).noalias() += g.transpose() * cols_;
  row_vector(bias_.grad) += g.colwise().sum();
  const RowMatrix<T> dcols = g * kernel_.value_matrix(out_, ck);
  Tensor<T> dx(s);
  for (std::size_t b = 0; b < s.batch; ++b) {
    for (std::size_t t = 0; t < out_steps; ++t) {
      const T* row = dcols.data() + (b * out_steps + t) * ck;
      for (std::size_t k = 0; k < width_; ++k) {
        const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t + k) - static_cast<std::ptrdiff_t>(pad);
        if (src < 0 || src >= static_cast<std::ptrdiff_t>(s.steps)) continue;
        T* dxin = dx.data() + (b * s.steps + static_cast<std::size_t>(src)) * in_;
        for (std::size_t c = 0; c < in_; ++c) dxin[c] += row[c * width_ + k];
      }
    }
  }
  return dx;
}

template <typename T>
nlohmann::json Conv1D<T>::config() const {
  return {{"in", in_}, {"out", out_}, {"width", width_}, {"padding", to_string(padding_)}};
}

template <typename T>
void Conv1D<T>::initialize(Rng& rng) {
  fill_glorot(kernel_.value, in_ * width_, out_ * width_, rng);
  std::fill(bias_.value.begin(), bias_.value.end(), T(0));
}

// ---------------------------------------------------------------------------------------
// AdaptiveRelu

template <typename T>
AdaptiveRelu<T>::AdaptiveRelu(std::size_t channels, T initial_alpha)
    : channels_(channels), initial_alpha_(initial_alpha), alpha_("alpha", {channels}) {
  if (channels == 0) throw ConfigError("adaptive_relu needs at least one channel");
  if (!std::isfinite(initial_alpha)) throw ConfigError("adaptive_relu alpha must be finite");
  std::fill(alpha_.value.begin(), alpha_.value.end(), initial_alpha);
}

template <typename T>
FeatureShape AdaptiveRelu<T>::output_shape(FeatureShape in) const {
  expect_channels("adaptive_relu", in.channels, channels_);
  return in;
}

template <typename T>
Tensor<T> AdaptiveRelu<T>::forward(const Tensor<T>& x, Mode) {
  expect_channels("adaptive_relu", x.shape().channels, channels_);
  input_ = x;
  Tensor<T> y(x.shape());
  const std::size_t rows = x.shape().batch * x.shape().steps;
  for (std::size_t r = 0; r < rows; ++r) {
    const T* in = x.data() + r * channels_;
    T* out = y.data() + r * channels_;
    for (std::size_t c = 0; c < channels_; ++c) out[c] = in[c] > T(0) ? in[c] : alpha_.value[c] * in[c];
  }
  debug_check_finite(y, "adaptive_relu");
  return y;
}

template <typename T>
Tensor<T> AdaptiveRelu<T>::backward(const Tensor<T>& grad_out) {
  expect_same_shape("adaptive_relu", grad_out.shape(), input_.shape());
  Tensor<T> dx(input_.shape());
  const std::size_t rows = input_.shape().batch * input_.shape().steps;
  for (std::size_t r = 0; r < rows; ++r) {
    const T* z = input_.data() + r * channels_;
    const T* g = grad_out.data() + r * channels_;
    T* d = dx.data() + r * channels_;
    for (std::size_t c = 0; c < channels_; ++c) {
      if (z[c] > T(0)) {
        d[c] = g[c];
      } else {
        d[c] = alpha_.value[c] * g[c];
        alpha_.grad[c] += g[c] * z[c];
      }
    }
  }
  return dx;
}

template <typename T>
nlohmann::json AdaptiveRelu<T>::config() const {
  return {{"channels", channels_}, {"initial_alpha", static_cast<double>(initial_alpha_)}};
}

template <typename T>
void AdaptiveRelu<T>::initialize(Rng&) {
  std::fill(alpha_.value.begin(), alpha_.value.end(), initial_alpha_);
}

// ---------------------------------------------------------------------------------------
// MaxPool1D

template <typename T>
MaxPool1D<T>::MaxPool1D(std::size_t window) : window_(window) {
  if (window == 0) throw ConfigError("maxpool window must be >= 1");
}

template <typename T>
FeatureShape MaxPool1D<T>::output_shape(FeatureShape in) const {
  if (in.steps < window_) {
    throw ShapeError("maxpool window " + std::to_string(window_) + " exceeds input length " +
                     std::to_string(in.steps));
  }
  return {in.steps / window_, in.channels};
}

template <typename T>
Tensor<T> MaxPool1D<T>::forward(const Tensor<T>& x, Mode) {
  const Shape3 s = x.shape();
  const FeatureShape o = output_shape(s.feature());
  in_shape_ = s;
  Tensor<T> y({s.batch, o.steps, s.channels});
  argmax_.assign(y.size(), 0);
  for (std::size_t b = 0; b < s.batch; ++b) {
    for (std::size_t t = 0; t < o.steps; ++t) {
      for (std::size_t c = 0; c < s.channels; ++c) {
        std::size_t best = t * window_;
        T value = x.at(b, best, c);
        for (std::size_t k = 1; k < window_; ++k) {
          const T v = x.at(b, t * window_ + k, c);
          if (v > value) {
            value = v;
            best = t * window_ + k;
          }
        }
        const std::size_t idx = (b * o.steps + t) * s.channels + c;
        y.data()[idx] = value;
        argmax_[idx] = best;
      }
    }
  }
  return y;
}

template <typename T>
Tensor<T> MaxPool1D<T>::backward(const Tensor<T>& grad_out) {
  const Shape3 s = in_shape_;
  expect_same_shape("maxpool1d", grad_out.shape(), {s.batch, s.steps / window_, s.channels});
  Tensor<T> dx(s);
  const std::size_t out_steps = s.steps / window_;
  for (std::size_t b = 0; b < s.batch; ++b) {
    for (std::size_t t = 0; t < out_steps; ++t) {
      for (std::size_t c = 0; c < s.channels; ++c) {
        const std::size_t idx = (b * out_steps + t) * s.channels + c;
        dx.at(b, argmax_[idx], c) += grad_out.data()[idx];
      }
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------------------
// Dropout

template <typename T>
Dropout<T>::Dropout(double rate, std::uint64_t seed) : rate_(rate), rng_(seed) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError("dropout rate must lie in [0, 1)");
}

template <typename T>
Tensor<T> Dropout<T>::forward(const Tensor<T>& x, Mode mode) {
  if (mode == Mode::Infer || rate_ == 0.0) {
    mask_.clear();
    return x;
  }
  if (!(frozen_ && mask_.size() == x.size())) {
    const T keep_scale = static_cast<T>(1.0 / (1.0 - rate_));
    mask_.resize(x.size());
    for (auto& m : mask_) m = uniform01(rng_) < rate_ ? T(0) : keep_scale;
  }
  Tensor<T> y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y.data()[i] = x.data()[i] * mask_[i];
  return y;
}

template <typename T>
Tensor<T> Dropout<T>::backward(const Tensor<T>& grad_out) {
  if (mask_.empty()) return grad_out;
  if (mask_.size() != grad_out.size()) throw ShapeError("dropout backward size does not match the last forward");
  Tensor<T> dx(grad_out.shape());
  for (std::size_t i = 0; i < dx.size(); ++i) dx.data()[i] = grad_out.data()[i] * mask_[i];
  return dx;
}

// ---------------------------------------------------------------------------------------
// Dense

template <typename T>
Dense<T>::Dense(std::size_t in_features, std::size_t out_features)
    : in_(in_features), out_(out_features), weight_("weight", {out_features, in_features}), bias_("bias", {out_features}) {
  if (in_ == 0 || out_ == 0) throw ConfigError("dense needs positive widths");
}

template <typename T>
FeatureShape Dense<T>::output_shape(FeatureShape in) const {
  expect_channels("dense", in.channels, in_);
  return {in.steps, out_};
}

template <typename T>
Tensor<T> Dense<T>::forward(const Tensor<T>& x, Mode) {
  expect_channels("dense", x.shape().channels, in_);
  input_ = x;
  Tensor<T> y({x.shape().batch, x.shape().steps, out_});
  auto ym = y.matrix();
  ym.noalias() = x.matrix() * weight_.value_matrix(out_, in_).transpose();
  ym.rowwise() += row_vector(bias_.value);
  debug_check_finite(y, "dense");
  return y;
}

template <typename T>
Tensor<T> Dense<T>::backward(const Tensor<T>& grad_out) {
  const Shape3 s = input_.shape();
  expect_same_shape("dense", grad_out.shape(), {s.batch, s.steps, out_});
  const auto g = grad_out.matrix();
  weight_.grad_matrix(out_, in_).noalias() += g.transpose() * input_.matrix();
  row_vector(bias_.grad) += g.colwise().sum();
  Tensor<T> dx(s);
  dx.matrix().noalias() = g * weight_.value_matrix(out_, in_);
  return dx;
}

template <typename T>
void Dense<T>::initialize(Rng& rng) {
  fill_glorot(weight_.value, in_, out_, rng);
  std::fill(bias_.value.begin(), bias_.value.end(), T(0));
}

// ---------------------------------------------------------------------------------------
// Relu, Flatten

template <typename T>
Tensor<T> Relu<T>::forward(const Tensor<T>& x, Mode) {
  input_ = x;
  Tensor<T> y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y.data()[i] = std::max(x.data()[i], T(0));
  return y;
}

template <typename T>
Tensor<T> Relu<T>::backward(const Tensor<T>& grad_out) {
  expect_same_shape("relu", grad_out.shape(), input_.shape());
  Tensor<T> dx(grad_out.shape());
  for (std::size_t i = 0; i < dx.size(); ++i) dx.data()[i] = input_.data()[i] > T(0) ? grad_out.data()[i] : T(0);
  return dx;
}

template <typename T>
Tensor<T> Flatten<T>::forward(const Tensor<T>& x, Mode) {
  in_shape_ = x.shape();
  return x.reshaped({in_shape_.batch, 1, in_shape_.steps * in_shape_.channels});
}

template <typename T>
Tensor<T> Flatten<T>::backward(const Tensor<T>& grad_out) {
  return grad_out.reshaped(in_shape_);
}

// ---------------------------------------------------------------------------------------
// LSTM

template <typename T>
LstmParams<T>::LstmParams(std::size_t input, std::size_t hidden)
    : input_weights("input_weights", {input, 4 * hidden}),
      recurrent_weights("recurrent_weights", {hidden, 4 * hidden}),
      bias("bias", {4 * hidden}) {}

template <typename T>
LstmState<T> LstmState<T>::zeros(std::size_t batch, std::size_t hidden) {
  return {RowMatrix<T>::Zero(static_cast<Index>(batch), static_cast<Index>(hidden)),
          RowMatrix<T>::Zero(static_cast<Index>(batch), static_cast<Index>(hidden))};
}

template <typename T>
LstmState<T> lstm_step(const RowMatrix<T>& x_t, const LstmState<T>& prev, const LstmParams<T>& params,
                       LstmGates<T>* gates) {
  const std::size_t in = params.input(), hid = params.hidden();
  const Index b = x_t.rows(), h = static_cast<Index>(hid);
  if (static_cast<std::size_t>(x_t.cols()) != in) {
    throw ShapeError("lstm_step input has " + std::to_string(x_t.cols()) + " features, expected " + std::to_string(in));
  }
  if (prev.h.rows() != b || prev.c.rows() != b || prev.h.cols() != h || prev.c.cols() != h) {
    throw ShapeError("lstm_step state does not match batch " + std::to_string(b) + " x hidden " + std::to_string(hid));
  }
  RowMatrix<T> z = x_t * params.input_weights.value_matrix(in, 4 * hid) +
                   prev.h * params.recurrent_weights.value_matrix(hid, 4 * hid);
  z.rowwise() += row_vector(params.bias.value);
  RowMatrix<T> f(b, h), i(b, h), o(b, h), g(b, h);
  LstmState<T> next{RowMatrix<T>(b, h), RowMatrix<T>(b, h)};
  for (Index r = 0; r < b; ++r) {
    for (Index j = 0; j < h; ++j) {
      f(r, j) = sigmoid(z(r, j));
      i(r, j) = sigmoid(z(r, h + j));
      o(r, j) = sigmoid(z(r, 2 * h + j));
      g(r, j) = std::tanh(z(r, 3 * h + j));
      next.c(r, j) = f(r, j) * prev.c(r, j) + i(r, j) * g(r, j);
      next.h(r, j) = o(r, j) * std::tanh(next.c(r, j));
    }
  }
  if (gates) *gates = {std::move(f), std::move(i), std::move(o), std::move(g)};
  return next;
}

template <typename T>
Lstm<T>::Lstm(std::size_t input, std::size_t hidden, bool return_sequences)
    : input_(input), hidden_(hidden), return_sequences_(return_sequences), p_(input, hidden) {
  if (input == 0 || hidden == 0) throw ConfigError("lstm needs positive input and hidden sizes");
}

template <typename T>
FeatureShape Lstm<T>::output_shape(FeatureShape in) const {
  expect_channels("lstm", in.channels, input_);
  if (in.steps == 0) throw ShapeError("lstm needs at least one time step");
  return {return_sequences_ ? in.steps : 1, hidden_};
}

template <typename T>
Tensor<T> Lstm<T>::forward(const Tensor<T>& x, Mode) {
  const Shape3 s = x.shape();
  output_shape(s.feature());
  const std::size_t B = s.batch, Ts = s.steps, H = hidden_, G = 4 * hidden_;
  x_ = x;
  gates_.noalias() = x.matrix() * p_.input_weights.value_matrix(input_, G);
  gates_.rowwise() += row_vector(p_.bias.value);
  cells_.resize(static_cast<Index>(B * Ts), static_cast<Index>(H));
  tanh_c_.resize(cells_.rows(), cells_.cols());
  states_.resize(cells_.rows(), cells_.cols());
  RowMatrix<T> h_prev = RowMatrix<T>::Zero(static_cast<Index>(B), static_cast<Index>(H));
  RowMatrix<T> c_prev = h_prev;
  RowMatrix<T> rec(static_cast<Index>(B), static_cast<Index>(G));
  const auto wh = p_.recurrent_weights.value_matrix(H, G);
  for (std::size_t t = 0; t < Ts; ++t) {
    rec.noalias() = h_prev * wh;
    for (std::size_t b = 0; b < B; ++b) {
      const std::size_t r = b * Ts + t;
      T* g = gates_.data() + r * G;
      const T* rr = rec.data() + b * G;
      for (std::size_t j = 0; j < 3 * H; ++j) g[j] = sigmoid(g[j] + rr[j]);
      for (std::size_t j = 3 * H; j < G; ++j) g[j] = std::tanh(g[j] + rr[j]);
      T* cell = cells_.data() + r * H;
      T* tc = tanh_c_.data() + r * H;
      T* hid = states_.data() + r * H;
      T* cp = c_prev.data() + b * H;
      T* hp = h_prev.data() + b * H;
      for (std::size_t j = 0; j < H; ++j) {
        cell[j] = g[j] * cp[j] + g[H + j] * g[3 * H + j];
        tc[j] = std::tanh(cell[j]);
        hid[j] = g[2 * H + j] * tc[j];
        cp[j] = cell[j];
        hp[j] = hid[j];
      }
    }
  }
  if (return_sequences_) {
    return Tensor<T>({B, Ts, H}, std::vector<T>(states_.data(), states_.data() + states_.size()));
  }
  Tensor<T> y({B, 1, H});
  for (std::size_t b = 0; b < B; ++b) {
    std::copy_n(states_.data() + (b * Ts + Ts - 1) * H, H, y.data() + b * H);
  }
  debug_check_finite(y, "lstm");
  return y;
}

template <typename T>
Tensor<T> Lstm<T>::backward(const Tensor<T>& grad_out) {
  const Shape3 s = x_.shape();
  const std::size_t B = s.batch, Ts = s.steps, H = hidden_, G = 4 * hidden_;
  expect_same_shape("lstm", grad_out.shape(), {B, return_sequences_ ? Ts : 1, H});
  RowMatrix<T> dz(static_cast<Index>(B * Ts), static_cast<Index>(G));
  RowMatrix<T> dh_next = RowMatrix<T>::Zero(static_cast<Index>(B), static_cast<Index>(H));
  RowMatrix<T> dc_next = dh_next;
  const auto wh = p_.recurrent_weights.value_matrix(H, G);
  auto dwh = p_.recurrent_weights.grad_matrix(H, G);
  for (std::size_t t = Ts; t-- > 0;) {
    for (std::size_t b = 0; b < B; ++b) {
      const std::size_t r = b * Ts + t;
      const T* g = gates_.data() + r * G;
      const T* tc = tanh_c_.data() + r * H;
      const T* cp = t > 0 ? cells_.data() + (r - 1) * H : nullptr;
      const T* up = nullptr;
      if (return_sequences_) {
        up = grad_out.data() + r * H;
      } else if (t == Ts - 1) {
        up = grad_out.data() + b * H;
      }
      T* d = dz.data() + r * G;
      T* dhn = dh_next.data() + b * H;
      T* dcn = dc_next.data() + b * H;
      for (std::size_t j = 0; j < H; ++j) {
        const T f = g[j], i = g[H + j], o = g[2 * H + j], cand = g[3 * H + j];
        const T dh = dhn[j] + (up ? up[j] : T(0));
        const T dc = dh * o * (T(1) - tc[j] * tc[j]) + dcn[j];
        const T c_prev = cp ? cp[j] : T(0);
        d[j] = dc * c_prev * f * (T(1) - f);
        d[H + j] = dc * cand * i * (T(1) - i);
        d[2 * H + j] = dh * tc[j] * o * (T(1) - o);
        d[3 * H + j] = dc * i * (T(1) - cand * cand);
        dcn[j] = dc * f;
      }
    }
    if (t > 0) {
      const Eigen::OuterStride<> hs(static_cast<Index>(Ts * H)), zs(static_cast<Index>(Ts * G));
      ConstStridedMap<T> h_prev(states_.data() + (t - 1) * H, static_cast<Index>(B), static_cast<Index>(H), hs);
      ConstStridedMap<T> dz_t(dz.data() + t * G, static_cast<Index>(B), static_cast<Index>(G), zs);
      dwh.noalias() += h_prev.transpose() * dz_t;
      dh_next.noalias() = dz_t * wh.transpose();
    }
  }
  const auto wx = p_.input_weights.value_matrix(input_, G);
  p_.input_weights.grad_matrix(input_, G).noalias() += x_.matrix().transpose() * dz;
  row_vector(p_.bias.grad) += dz.colwise().sum();
  Tensor<T> dx(s);
  dx.matrix().noalias() = dz * wx.transpose();
  return dx;
}

template <typename T>
nlohmann::json Lstm<T>::config() const {
  return {{"input", input_}, {"hidden", hidden_}, {"return_sequences", return_sequences_}};
}

template <typename T>
void Lstm<T>::initialize(Rng& rng) {
  fill_glorot(p_.input_weights.value, input_, 4 * hidden_, rng);
  fill_uniform(p_.recurrent_weights.value, 1.0 / std::sqrt(static_cast<double>(hidden_)), rng);
  std::fill(p_.bias.value.begin(), p_.bias.value.end(), T(0));
  std::fill_n(p_.bias.value.begin(), hidden_, T(1));
}

// ---------------------------------------------------------------------------------------
// SimpleRnn

template <typename T>
SimpleRnn<T>::SimpleRnn(std::size_t input, std::size_t hidden, bool return_sequences, std::size_t truncation)
    : input_(input),
      hidden_(hidden),
      return_sequences_(return_sequences),
      truncation_(truncation),
      wx_("input_weights", {input, hidden}),
      wh_("recurrent_weights", {hidden, hidden}),
      bias_("bias", {hidden}) {
  if (input == 0 || hidden == 0) throw ConfigError("rnn needs positive input and hidden sizes");
}

template <typename T>
FeatureShape SimpleRnn<T>::output_shape(FeatureShape in) const {
  expect_channels("rnn", in.channels, input_);
  if (in.steps == 0) throw ShapeError("rnn needs at least one time step");
  return {return_sequences_ ? in.steps : 1, hidden_};
}

template <typename T>
Tensor<T> SimpleRnn<T>::forward(const Tensor<T>& x, Mode) {
  const Shape3 s = x.shape();
  output_shape(s.feature());
  const std::size_t B = s.batch, Ts = s.steps, H = hidden_;
  x_ = x;
  states_.noalias() = x.matrix() * wx_.value_matrix(input_, H);
  states_.rowwise() += row_vector(bias_.value);
  RowMatrix<T> h_prev = RowMatrix<T>::Zero(static_cast<Index>(B), static_cast<Index>(H));
  RowMatrix<T> rec(static_cast<Index>(B), static_cast<Index>(H));
  const auto wh = wh_.value_matrix(H, H);
  for (std::size_t t = 0; t < Ts; ++t) {
    rec.noalias() = h_prev * wh;
    for (std::size_t b = 0; b < B; ++b) {
      T* hid = states_.data() + (b * Ts + t) * H;
      T* hp = h_prev.data() + b * H;
      const T* rr = rec.data() + b * H;
      for (std::size_t j = 0; j < H; ++j) {
        hid[j] = std::tanh(hid[j] + rr[j]);
        hp[j] = hid[j];
      }
    }
  }
  if (return_sequences_) {
    return Tensor<T>({B, Ts, H}, std::vector<T>(states_.data(), states_.data() + states_.size()));
  }
  Tensor<T> y({B, 1, H});
  for (std::size_t b = 0; b < B; ++b) std::copy_n(states_.data() + (b * Ts + Ts - 1) * H, H, y.data() + b * H);
  return y;
}

template <typename T>
Tensor<T> SimpleRnn<T>::backward(const Tensor<T>& grad_out) {
  const Shape3 s = x_.shape();
  const std::size_t B = s.batch, Ts = s.steps, H = hidden_;
  expect_same_shape("rnn", grad_out.shape(), {B, return_sequences_ ? Ts : 1, H});
  RowMatrix<T> dz(static_cast<Index>(B * Ts), static_cast<Index>(H));
  RowMatrix<T> dh_next = RowMatrix<T>::Zero(static_cast<Index>(B), static_cast<Index>(H));
  const auto wh = wh_.value_matrix(H, H);
  auto dwh = wh_.grad_matrix(H, H);
  for (std::size_t t = Ts; t-- > 0;) {
    for (std::size_t b = 0; b < B; ++b) {
      const std::size_t r = b * Ts + t;
      const T* hid = states_.data() + r * H;
      const T* up = nullptr;
      if (return_sequences_) {
        up = grad_out.data() + r * H;
      } else if (t == Ts - 1) {
        up = grad_out.data() + b * H;
      }
      T* d = dz.data() + r * H;
      const T* dhn = dh_next.data() + b * H;
      for (std::size_t j = 0; j < H; ++j) d[j] = (dhn[j] + (up ? up[j] : T(0))) * (T(1) - hid[j] * hid[j]);
    }
    if (t > 0) {
      const Eigen::OuterStride<> hs(static_cast<Index>(Ts * H));
      ConstStridedMap<T> h_prev(states_.data() + (t - 1) * H, static_cast<Index>(B), static_cast<Index>(H), hs);
      ConstStridedMap<T> dz_t(dz.data() + t * H, static_cast<Index>(B), static_cast<Index>(H), hs);
      dwh.noalias() += h_prev.transpose() * dz_t;
      if (truncation_ > 0 && t % truncation_ == 0) {
        dh_next.setZero();
      } else {
        dh_next.noalias() = dz_t * wh.transpose();
      }
    }
  }
  const auto wx = wx_.value_matrix(input_, H);
  wx_.grad_matrix(input_, H).noalias() += x_.matrix().transpose() * dz;
  row_vector(bias_.grad) += dz.colwise().sum();
  Tensor<T> dx(s);
  dx.matrix().noalias() = dz * wx.transpose();
  return dx;
}

template <typename T>
nlohmann::json SimpleRnn<T>::config() const {
  return {{"input", input_}, {"hidden", hidden_}, {"return_sequences", return_sequences_}, {"truncation", truncation_}};
}

template <typename T>
void SimpleRnn<T>::initialize(Rng& rng) {
  fill_glorot(wx_.value, input_, hidden_, rng);
  fill_uniform(wh_.value, 1.0 / std::sqrt(static_cast<double>(hidden_)), rng);
  std::fill(bias_.value.begin(), bias_.value.end(), T(0));
}

// ---------------------------------------------------------------------------------------
// Factory and functional forms

template <typename T>
std::unique_ptr<Layer<T>> make_layer(const std::string& kind, const nlohmann::json& c) {
  try {
    if (kind == "conv1d") {
      return std::make_unique<Conv1D<T>>(c.at("in").get<std::size_t>(), c.at("out").get<std::size_t>(),
                                         c.at("width").get<std::size_t>(),
                                         padding_from_string(c.at("padding").get<std::string>()));
    }
    if (kind == "adaptive_relu") {
      return std::make_unique<AdaptiveRelu<T>>(c.at("channels").get<std::size_t>(),
                                               static_cast<T>(c.at("initial_alpha").get<double>()));
    }
    if (kind == "maxpool1d") return std::make_unique<MaxPool1D<T>>(c.at("window").get<std::size_t>());
    if (kind == "dropout") return std::make_unique<Dropout<T>>(c.at("rate").get<double>());
    if (kind == "dense") return std::make_unique<Dense<T>>(c.at("in").get<std::size_t>(), c.at("out").get<std::size_t>());
    if (kind == "relu") return std::make_unique<Relu<T>>();
    if (kind == "flatten") return std::make_unique<Flatten<T>>();
    if (kind == "lstm") {
      return std::make_unique<Lstm<T>>(c.at("input").get<std::size_t>(), c.at("hidden").get<std::size_t>(),
                                       c.at("return_sequences").get<bool>());
    }
    if (kind == "rnn") {
      return std::make_unique<SimpleRnn<T>>(c.at("input").get<std::size_t>(), c.at("hidden").get<std::size_t>(),
                                            c.at("return_sequences").get<bool>(), c.at("truncation").get<std::size_t>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("layer '" + kind + "' config: " + e.what());
  }
  throw ConfigError("unknown layer kind '" + kind + "'");
}

template <typename T>
Tensor<T> conv1d(const Tensor<T>& x, const Tensor<T>& kernel_oiw, std::span<const T> bias, Padding padding) {
  const Shape3 k = kernel_oiw.shape();
  if (bias.size() != k.batch) throw ShapeError("conv1d bias length does not match output channels");
  Conv1D<T> layer(k.steps, k.batch, k.channels, padding);
  std::copy(kernel_oiw.values().begin(), kernel_oiw.values().end(), layer.kernel().value.begin());
  std::copy(bias.begin(), bias.end(), layer.bias().value.begin());
  return layer.forward(x, Mode::Infer);
}

template <typename T>
Tensor<T> adaptive_relu(const Tensor<T>& z, std::span<const T> alpha) {
  AdaptiveRelu<T> layer(alpha.size());
  std::copy(alpha.begin(), alpha.end(), layer.alpha().value.begin());
  return layer.forward(z, Mode::Infer);
}

template <typename T>
Tensor<T> maxpool1d(const Tensor<T>& x, std::size_t window) {
  MaxPool1D<T> layer(window);
  return layer.forward(x, Mode::Infer);
}

template <typename T>
Tensor<T> dropout(const Tensor<T>& x, double rate, Mode mode, std::uint64_t seed) {
  Dropout<T> layer(rate, seed);
  return layer.forward(x, mode);
}

template <typename T>
Tensor<T> dense(const Tensor<T>& x, std::span<const T> weight, std::span<const T> bias) {
  const std::size_t in = x.shape().channels;
  if (bias.empty() || weight.size() != bias.size() * in) throw ShapeError("dense weight must be out x in");
  Dense<T> layer(in, bias.size());
  std::copy(weight.begin(), weight.end(), layer.weight().value.begin());
  std::copy(bias.begin(), bias.end(), layer.bias().value.begin());
  return layer.forward(x, Mode::Infer);
}

#define MAGCLIMB_INSTANTIATE_LAYERS(T)                                                                     \
  template class Conv1D<T>;                                                                                \
  template class AdaptiveRelu<T>;                                                                          \
  template class MaxPool1D<T>;                                                                             \
  template class Dropout<T>;                                                                               \
  template class Dense<T>;                                                                                 \
  template class Relu<T>;                                                                                  \
  template class Flatten<T>;                                                                               \
  template struct LstmParams<T>;                                                                           \
  template struct LstmState<T>;                                                                            \
  template class Lstm<T>;                                                                                  \
  template class SimpleRnn<T>;                                                                             \
  template LstmState<T> lstm_step(const RowMatrix<T>&, const LstmState<T>&, const LstmParams<T>&,          \
                                  LstmGates<T>*);                                                          \
  template std::unique_ptr<Layer<T>> make_layer<T>(const std::string&, const nlohmann::json&);             \
  template Tensor<T> conv1d(const Tensor<T>&, const Tensor<T>&, std::span<const T>, Padding);              \
  template Tensor<T> adaptive_relu(const Tensor<T>&, std::span<const T>);                                  \
  template Tensor<T> maxpool1d(const Tensor<T>&, std::size_t);                                             \
  template Tensor<T> dropout(const Tensor<T>&, double, Mode, std::uint64_t);                               \
  template Tensor<T> dense(const Tensor<T>&, std::span<const T>, std::span<const T>);

MAGCLIMB_INSTANTIATE_LAYERS(float)
MAGCLIMB_INSTANTIATE_LAYERS(double)

}  // namespace magclimb::neural
