#pragma once

#include <cstdint>
#include <vector>

#include "magclimb/neural/tensor.hpp"

namespace magclimb::neural {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Moment estimates aligned with the parameter list passed to adam_step.
template <typename T>
struct AdamState {
  AdamConfig config;
  std::uint64_t step = 0;
  std::vector<std::vector<T>> m;
  std::vector<std::vector<T>> v;
};

/// One bias-corrected Adam update using each Param's accumulated gradient:
///   m = b1 m + (1 - b1) g,  v = b2 v + (1 - b2) g^2,
///   theta -= lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps).
/// The state is sized on first use; later calls must pass parameters of the same shapes.
template <typename T>
void adam_step(const std::vector<Param<T>*>& params, AdamState<T>& state);

}  // namespace magclimb::neural
