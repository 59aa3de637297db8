#include "magclimb/neural/adam.hpp"

#include <cmath>

#include "magclimb/common/errors.hpp"

namespace magclimb::neural {

template <typename T>
void adam_step(const std::vector<Param<T>*>& params, AdamState<T>& state) {
  if (state.m.empty() && state.step == 0) {
    for (const auto* p : params) {
      state.m.emplace_back(p->size(), T(0));
      state.v.emplace_back(p->size(), T(0));
    }
  }
  if (state.m.size() != params.size()) throw ShapeError("adam state was built for a different parameter list");
  const AdamConfig& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correct1 = 1.0 - std::pow(c.beta1, t);
  const double correct2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Param<T>& p = *params[k];
    auto& m = state.m[k];
    auto& v = state.v[k];
    if (m.size() != p.size()) throw ShapeError("adam state size mismatch for parameter '" + p.name + "'");
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double g = p.grad[i];
      const double mi = c.beta1 * m[i] + (1.0 - c.beta1) * g;
      const double vi = c.beta2 * v[i] + (1.0 - c.beta2) * g * g;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      const double update = c.lr * (mi / correct1) / (std::sqrt(vi / correct2) + c.epsilon);
      p.value[i] = static_cast<T>(p.value[i] - update);
    }
  }
}

template void adam_step(const std::vector<Param<float>*>&, AdamState<float>&);
template void adam_step(const std::vector<Param<double>*>&, AdamState<double>&);

}  // namespace magclimb::neural
