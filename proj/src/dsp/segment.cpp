#include "magclimb/dsp/segment.hpp"

#include <cmath>

#include "magclimb/common/errors.hpp"

namespace magclimb::dsp {

std::vector<double> magnitude_channel(const SignalFrame& frame, const std::vector<std::string>& axes) {
  if (axes.empty()) throw ConfigError("magnitude_channel needs at least one axis");
  std::vector<const std::vector<double>*> cols;
  cols.reserve(axes.size());
  for (const auto& name : axes) cols.push_back(&frame.channel(name));
  std::vector<double> out(frame.length(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    double acc = 0.0;
    for (const auto* c : cols) acc += (*c)[i] * (*c)[i];
    out[i] = std::sqrt(acc);
  }
  return out;
}

std::size_t window_count(std::size_t n, std::size_t length, std::size_t stride) {
  if (length == 0 || stride == 0) throw ConfigError("window length and stride must be >= 1");
  if (n < length) return 0;
  return (n - length) / stride + 1;
}

std::vector<std::vector<double>> window_segments(std::span<const double> x, std::size_t length, std::size_t stride) {
  const std::size_t count = window_count(x.size(), length, stride);
  std::vector<std::vector<double>> out;
  out.reserve(count);
  for (std::size_t w = 0; w < count; ++w) {
    const auto first = x.begin() + static_cast<std::ptrdiff_t>(w * stride);
    out.emplace_back(first, first + static_cast<std::ptrdiff_t>(length));
  }
  return out;
}

}  // namespace magclimb::dsp
