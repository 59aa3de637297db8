#include "magclimb/neural/gradient_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "magclimb/common/rng.hpp"
#include "magclimb/neural/loss.hpp"

namespace magclimb::neural {

double relative_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

namespace {

std::vector<std::size_t> pick_indices(std::size_t n, std::size_t limit, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (limit == 0 || limit >= n) return idx;
  for (std::size_t i = 0; i < limit; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(limit);
  return idx;
}

template <typename LossFn>
void check_values(std::vector<double>& values, const std::vector<double>& analytic, const std::string& label,
                  const std::vector<std::size_t>& indices, double eps, LossFn&& loss, GradCheckResult& result) {
  for (std::size_t i : indices) {
    const double saved = values[i];
    values[i] = saved + eps;
    const double up = loss();
    values[i] = saved - eps;
    const double down = loss();
    values[i] = saved;
    const double numeric = (up - down) / (2.0 * eps);
    const double err = relative_error(analytic[i], numeric);
    ++result.checked;
    if (result.worst.empty() || err > result.max_rel_error) {
      result.max_rel_error = err;
      result.worst = label + "[" + std::to_string(i) + "]";
    }
  }
}

}  // namespace

GradCheckResult check_model_gradients(ModelGraph<double>& model, const Tensor<double>& x,
                                      const Tensor<double>& targets, double eps, std::size_t max_per_param,
                                      std::uint64_t seed) {
  model.freeze_dropout(false);
  model.forward(x, Mode::Train);  // draws the dropout masks
  model.freeze_dropout(true);
  Tensor<double> input = x;
  auto loss = [&] { return cross_entropy(softmax(model.forward(input, Mode::Train)), targets); };

  model.zero_grad();
  const auto probs = softmax(model.forward(input, Mode::Train));
  const auto dx = model.backward(softmax_cross_entropy_grad(probs, targets));

  GradCheckResult result;
  Rng rng = make_rng(seed, 0x6C);
  for (std::size_t li = 0; li < model.layer_count(); ++li) {
    for (auto* p : model.layer(li).params()) {
      const auto idx = pick_indices(p->size(), max_per_param, rng);
      check_values(p->value, p->grad, std::to_string(li) + ":" + p->name, idx, eps, loss, result);
    }
  }
  const std::vector<double> dx_values(dx.values().begin(), dx.values().end());
  const auto idx = pick_indices(input.size(), max_per_param, rng);
  check_values(input.storage(), dx_values, "input", idx, eps, loss, result);
  model.freeze_dropout(false);
  return result;
}

GradCheckResult check_layer_gradients(Layer<double>& layer, const Tensor<double>& x, double eps, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0x1A);
  Tensor<double> input = x;
  const Tensor<double> probe = layer.forward(input, Mode::Train);
  std::vector<double> w(probe.size());
  for (auto& v : w) v = 2.0 * uniform01(rng) - 1.0;
  auto loss = [&] {
    const auto y = layer.forward(input, Mode::Train);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += w[i] * y.data()[i];
    return s;
  };
  for (auto* p : layer.params()) std::fill(p->grad.begin(), p->grad.end(), 0.0);
  layer.forward(input, Mode::Train);
  const auto dx = layer.backward(Tensor<double>(probe.shape(), w));

  GradCheckResult result;
  for (auto* p : layer.params()) {
    check_values(p->value, p->grad, p->name, pick_indices(p->size(), 0, rng), eps, loss, result);
  }
  const std::vector<double> dx_values(dx.values().begin(), dx.values().end());
  check_values(input.storage(), dx_values, "input", pick_indices(input.size(), 0, rng), eps, loss, result);
  return result;
}

}  // namespace magclimb::neural
