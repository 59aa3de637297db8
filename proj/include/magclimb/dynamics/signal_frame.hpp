#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace magclimb {

struct Channel {
  std::string name;
  std::vector<double> samples;

  bool operator==(const Channel&) const = default;
};

/// Multi-channel record sampled on a uniform clock: t_i = i / sample_rate_hz.
class SignalFrame {
 public:
  SignalFrame() = default;
  SignalFrame(double sample_rate_hz, std::size_t length);

  double sample_rate_hz() const { return sample_rate_hz_; }
  std::size_t length() const { return timestamps_.size(); }
  const std::vector<double>& timestamps() const { return timestamps_; }
  const std::vector<Channel>& channels() const { return channels_; }

  /// Appends a channel; its length must equal the frame length.
  void add_channel(std::string name, std::vector<double> samples);

  bool has_channel(std::string_view name) const;
  /// Throws LookupError for unknown names.
  const std::vector<double>& channel(std::string_view name) const;

  std::vector<std::string> channel_names() const;

  /// Throws ConfigError if any invariant is broken.
  void validate() const;

  bool operator==(const SignalFrame&) const = default;

 private:
  double sample_rate_hz_ = 1.0;
  std::vector<double> timestamps_;
  std::vector<Channel> channels_;
};

/// Header `t,<channel names>`, one row per sample, shortest round-trip decimals.
std::string to_csv(const SignalFrame& frame);
SignalFrame frame_from_csv(std::string_view text, std::string_view source = "<csv>");

void write_csv(const SignalFrame& frame, const std::filesystem::path& path);
SignalFrame read_csv(const std::filesystem::path& path);

}  // namespace magclimb
