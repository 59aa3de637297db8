#include "magclimb/neural/loss.hpp"

#include <algorithm>
#include <cmath>

namespace magclimb::neural {

namespace {

template <typename T>
void expect_match(const Tensor<T>& a, const Tensor<T>& b) {
  if (!(a.shape() == b.shape())) {
    throw ShapeError("probabilities " + to_string(a.shape()) + " and targets " + to_string(b.shape()) + " differ");
  }
}

}  // namespace

template <typename T>
Tensor<T> softmax(const Tensor<T>& logits) {
  Tensor<T> p(logits.shape());
  const std::size_t c = logits.shape().channels;
  const std::size_t rows = logits.shape().batch * logits.shape().steps;
  for (std::size_t r = 0; r < rows; ++r) {
    const T* z = logits.data() + r * c;
    T* out = p.data() + r * c;
    const T top = *std::max_element(z, z + c);
    T sum = T(0);
    for (std::size_t j = 0; j < c; ++j) {
      out[j] = std::exp(z[j] - top);
      sum += out[j];
    }
    for (std::size_t j = 0; j < c; ++j) out[j] /= sum;
  }
  return p;
}

template <typename T>
T cross_entropy(const Tensor<T>& probs, const Tensor<T>& targets) {
  expect_match(probs, targets);
  const std::size_t rows = probs.shape().batch * probs.shape().steps;
  if (rows == 0) throw DataError("cross_entropy of an empty batch");
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double y = targets.data()[i];
    if (y != 0.0) total -= y * std::log(std::max(static_cast<double>(probs.data()[i]), 1e-12));
  }
  return static_cast<T>(total / static_cast<double>(rows));
}

template <typename T>
Tensor<T> softmax_cross_entropy_grad(const Tensor<T>& probs, const Tensor<T>& targets) {
  expect_match(probs, targets);
  const std::size_t rows = probs.shape().batch * probs.shape().steps;
  const T scale = T(1) / static_cast<T>(rows);
  Tensor<T> g(probs.shape());
  for (std::size_t i = 0; i < g.size(); ++i) g.data()[i] = (probs.data()[i] - targets.data()[i]) * scale;
  return g;
}

template Tensor<float> softmax(const Tensor<float>&);
template Tensor<double> softmax(const Tensor<double>&);
template float cross_entropy(const Tensor<float>&, const Tensor<float>&);
template double cross_entropy(const Tensor<double>&, const Tensor<double>&);
template Tensor<float> softmax_cross_entropy_grad(const Tensor<float>&, const Tensor<float>&);
template Tensor<double> softmax_cross_entropy_grad(const Tensor<double>&, const Tensor<double>&);

}  // namespace magclimb::neural
