#include "magclimb/dynamics/signal_frame.hpp"

#include <algorithm>
#include <cmath>

#include "magclimb/common/errors.hpp"
#include "magclimb/common/io.hpp"

namespace magclimb {

SignalFrame::SignalFrame(double sample_rate_hz, std::size_t length) : sample_rate_hz_(sample_rate_hz) {
  if (!(sample_rate_hz > 0.0)) throw ConfigError("sample_rate_hz must be positive");
  timestamps_.resize(length);
  for (std::size_t i = 0; i < length; ++i) timestamps_[i] = static_cast<double>(i) / sample_rate_hz;
}

void SignalFrame::add_channel(std::string name, std::vector<double> samples) {
  if (samples.size() != timestamps_.size()) {
    throw ConfigError("channel '" + name + "' has " + std::to_string(samples.size()) + " samples, frame has " +
                      std::to_string(timestamps_.size()));
  }
  if (name.empty() || name == "t" || name.find(',') != std::string::npos) {
    throw ConfigError("invalid channel name '" + name + "'");
  }
  if (has_channel(name)) throw ConfigError("duplicate channel '" + name + "'");
  channels_.push_back({std::move(name), std::move(samples)});
}

bool SignalFrame::has_channel(std::string_view name) const {
  return std::any_of(channels_.begin(), channels_.end(), [&](const Channel& c) { return c.name == name; });
}

const std::vector<double>& SignalFrame::channel(std::string_view name) const {
  for (const auto& c : channels_) {
    if (c.name == name) return c.samples;
  }
  throw LookupError("unknown channel '" + std::string(name) + "'");
}

std::vector<std::string> SignalFrame::channel_names() const {
  std::vector<std::string> names;
  names.reserve(channels_.size());
  for (const auto& c : channels_) names.push_back(c.name);
  return names;
}

void SignalFrame::validate() const {
  if (!(sample_rate_hz_ > 0.0)) throw ConfigError("sample_rate_hz must be positive");
  const double dt = 1.0 / sample_rate_hz_;
  for (std::size_t i = 1; i < timestamps_.size(); ++i) {
    const double step = timestamps_[i] - timestamps_[i - 1];
    if (!(step > 0.0) || std::abs(step - dt) > 1e-6 * dt + 1e-9 * std::abs(timestamps_[i])) {
      throw ConfigError("timestamps are not uniformly spaced at 1/sample_rate_hz (row " + std::to_string(i) + ")");
    }
  }
  for (const auto& c : channels_) {
    if (c.samples.size() != timestamps_.size()) throw ConfigError("channel '" + c.name + "' length mismatch");
  }
}

std::string to_csv(const SignalFrame& frame) {
  std::string out = "t";
  for (const auto& c : frame.channels()) {
    out += ',';
    out += c.name;
  }
  out += '\n';
  for (std::size_t i = 0; i < frame.length(); ++i) {
    out += io::format_double(frame.timestamps()[i]);
    for (const auto& c : frame.channels()) {
      out += ',';
      out += io::format_double(c.samples[i]);
    }
    out += '\n';
  }
  return out;
}

SignalFrame frame_from_csv(std::string_view text, std::string_view source) {
  std::vector<std::string_view> lines;
  for (auto line : io::split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.push_back(line);
  }
  if (lines.empty()) throw ConfigError(std::string(source) + ": empty CSV");
  const auto header = io::split(lines.front(), ',');
  if (header.empty() || header.front() != "t") {
    throw ConfigError(std::string(source) + ":1: header must start with 't'");
  }
  const std::size_t n = lines.size() - 1;
  const std::size_t cols = header.size();
  std::vector<double> t(n);
  std::vector<std::vector<double>> data(cols - 1, std::vector<double>(n));
  for (std::size_t r = 0; r < n; ++r) {
    const auto fields = io::split(lines[r + 1], ',');
    const std::string where = std::string(source) + ":" + std::to_string(r + 2);
    if (fields.size() != cols) {
      throw ConfigError(where + ": expected " + std::to_string(cols) + " fields, got " + std::to_string(fields.size()));
    }
    t[r] = io::parse_double(fields[0], where);
    for (std::size_t c = 1; c < cols; ++c) data[c - 1][r] = io::parse_double(fields[c], where);
  }
  double rate = 1.0;
  if (n >= 2) {
    const double dt = (t[n - 1] - t[0]) / static_cast<double>(n - 1);
    if (!(dt > 0.0)) throw ConfigError(std::string(source) + ": timestamps must increase");
    rate = 1.0 / dt;
    // Snap to the nearest value that reproduces the written timestamps.
    const double rounded = std::round(rate * 1e6) / 1e6;
    if (std::abs(rounded - rate) < 1e-6 * rate) rate = rounded;
  }
  SignalFrame frame(rate, n);
  for (std::size_t c = 1; c < cols; ++c) frame.add_channel(std::string(header[c]), std::move(data[c - 1]));
  for (std::size_t r = 0; r < n; ++r) {
    if (std::abs(frame.timestamps()[r] - t[r]) > 1e-6 / rate + 1e-9 * std::abs(t[r])) {
      throw ConfigError(std::string(source) + ":" + std::to_string(r + 2) + ": timestamp off the uniform grid");
    }
  }
  return frame;
}

void write_csv(const SignalFrame& frame, const std::filesystem::path& path) {
  io::write_text_atomic(path, to_csv(frame));
}

SignalFrame read_csv(const std::filesystem::path& path) {
  return frame_from_csv(io::read_text(path), path.string());
}

}  // namespace magclimb
