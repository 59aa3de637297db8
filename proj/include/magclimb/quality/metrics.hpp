// Signal-quality metrics for comparing the body sensor against the rod sensor.
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "magclimb/dynamics/signal_frame.hpp"

namespace magclimb::quality {

/// Sum of squares.
double signal_energy(std::span<const double> x);

/// Sample standard deviation (n - 1 denominator). Throws DataError for n < 2.
double signal_std(std::span<const double> x);

/// Fisher (excess) kurtosis m4 / m2^2 - 3 from central moments.
/// Throws DataError for n < 4 and DegenerateError for zero variance.
double excess_kurtosis(std::span<const double> x);

/// m3 / m2^(3/2). Throws DataError for n < 3 and DegenerateError for zero variance.
double skewness(std::span<const double> x);

struct WelchConfig {
  std::size_t segment_len = 256;
  double overlap = 0.5;
};

struct Psd {
  std::vector<double> freqs;    ///< Hz, 0 .. fs/2
  std::vector<double> density;  ///< one-sided, units^2 / Hz
  double resolution_hz = 0.0;
};

/// Welch estimate: mean-detrended, Hann-windowed segments, averaged one-sided periodograms
/// scaled so that sum(density) * df matches the signal variance.
/// Throws ConfigError when the segment is longer than the signal or overlap is outside [0, 1).
Psd psd_welch(std::span<const double> x, double sample_rate_hz, std::size_t segment_len, double overlap);

/// Power-weighted mean frequency of a PSD. Throws DegenerateError for an all-zero PSD.
double spectral_centroid(const Psd& psd);

/// Centroid of the Welch PSD; the segment shrinks to the signal length for short inputs.
double spectral_centroid(std::span<const double> x, double sample_rate_hz, const WelchConfig& welch = {});

struct ChannelQuality {
  std::string name;
  double energy = 0.0;
  std::optional<double> std;
  std::optional<double> excess_kurtosis;
  std::optional<double> skewness;
  std::optional<double> spectral_centroid_hz;
  Psd psd;
  /// Metrics that are undefined for this channel (e.g. a constant signal).
  std::vector<std::string> degenerate;
};

struct QualityReport {
  double sample_rate_hz = 0.0;
  WelchConfig welch;
  std::vector<ChannelQuality> channels;

  const ChannelQuality& channel(const std::string& name) const;
};

/// All six metrics for every channel of the frame. Undefined metrics are reported as
/// degenerate rather than raised.
QualityReport quality_report(const SignalFrame& frame, const WelchConfig& welch = {});

nlohmann::json to_json(const QualityReport& report);

/// Metric-by-column table: rows Energy_<ch>, STD_<ch>, Kurtosis_<ch>, Skewness_<ch>,
/// Spectral_Centroid_<ch>; one column per report. Undefined values are written as "nan".
std::string quality_table_csv(const std::vector<std::string>& column_names,
                              const std::vector<QualityReport>& reports);

}  // namespace magclimb::quality
