#pragma once

#include "magclimb/neural/tensor.hpp"

namespace magclimb::neural {

/// Row-wise softmax over channels with the row maximum subtracted first.
template <typename T>
Tensor<T> softmax(const Tensor<T>& logits);

/// Mean over rows of -sum(y log p), with p clamped below at 1e-12.
template <typename T>
T cross_entropy(const Tensor<T>& probs, const Tensor<T>& targets);

/// Gradient of cross_entropy(softmax(z), y) with respect to z: (p - y) / rows.
template <typename T>
Tensor<T> softmax_cross_entropy_grad(const Tensor<T>& probs, const Tensor<T>& targets);

}  // namespace magclimb::neural
