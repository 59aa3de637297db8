// Digital Butterworth low-pass: analog prototype, pre-warped bilinear transform,
// realized as a cascade of second-order sections.
#pragma once

#include <complex>
#include <span>
#include <vector>

#include <json.hpp>

namespace magclimb::dsp {

struct FilterSpec {
  int order = 4;
  double cutoff_hz = 10.0;
  double sample_rate_hz = 100.0;
};

/// y[n] = b0 x[n] + b1 x[n-1] + b2 x[n-2] - a1 y[n-1] - a2 y[n-2]  (a0 = 1).
/// First-order sections carry b2 = a2 = 0.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;

  bool operator==(const Biquad&) const = default;
};

struct FilterCoeffs {
  std::vector<Biquad> sections;

  bool operator==(const FilterCoeffs&) const = default;
};

/// Throws ConfigError unless order >= 1 and 0 < cutoff < Nyquist.
void validate(const FilterSpec& spec);

FilterCoeffs design_butterworth(const FilterSpec& spec);

/// H(e^{j 2 pi f / fs}) of the cascade.
std::complex<double> frequency_response(const FilterCoeffs& coeffs, double freq_hz, double sample_rate_hz);

/// True when every section's poles lie strictly inside the unit circle.
bool is_stable(const FilterCoeffs& coeffs);

/// Causal cascade (transposed direct form II), zero initial state, same length as input.
std::vector<double> filter_signal(const FilterCoeffs& coeffs, std::span<const double> x);

nlohmann::json to_json(const FilterCoeffs& coeffs);
FilterCoeffs coeffs_from_json(const nlohmann::json& j);

nlohmann::json to_json(const FilterSpec& spec);
FilterSpec filter_spec_from_json(const nlohmann::json& j, const FilterSpec& defaults = {});

}  // namespace magclimb::dsp
