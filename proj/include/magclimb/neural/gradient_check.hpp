// Central finite-difference verification of analytic gradients (double precision).
#pragma once

#include <cstdint>
#include <string>

#include "magclimb/neural/model_graph.hpp"

namespace magclimb::neural {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst;      ///< "<layer index>:<param name>[i]" or "input[i]"
  std::size_t checked = 0;
};

/// |a - n| / max(|a|, |n|, floor).
double relative_error(double analytic, double numeric, double floor = 1e-6);

/// Loss = cross_entropy(softmax(model(x)), targets). Dropout masks are drawn once in
/// training mode and then frozen.
/// `max_per_param` > 0 samples that many entries of each parameter (seeded); 0 checks all.
GradCheckResult check_model_gradients(ModelGraph<double>& model, const Tensor<double>& x,
                                      const Tensor<double>& targets, double eps = 1e-5,
                                      std::size_t max_per_param = 0, std::uint64_t seed = 0);

/// Loss = sum(w * layer(x)) with fixed random weights w; checks parameters and the input.
GradCheckResult check_layer_gradients(Layer<double>& layer, const Tensor<double>& x, double eps = 1e-5,
                                      std::uint64_t seed = 0);

}  // namespace magclimb::neural
