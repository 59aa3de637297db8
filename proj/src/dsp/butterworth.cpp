#include "magclimb/dsp/butterworth.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "magclimb/common/errors.hpp"
#include "magclimb/common/json_fields.hpp"

namespace magclimb::dsp {

void validate(const FilterSpec& spec) {
  if (spec.order < 1) throw ConfigError("filter order must be >= 1");
  if (!(spec.sample_rate_hz > 0.0)) throw ConfigError("filter sample_rate_hz must be positive");
  if (!(spec.cutoff_hz > 0.0) || !(spec.cutoff_hz < spec.sample_rate_hz / 2.0)) {
    throw ConfigError("filter cutoff " + std::to_string(spec.cutoff_hz) + " Hz must lie in (0, Nyquist=" +
                      std::to_string(spec.sample_rate_hz / 2.0) + " Hz)");
  }
}

FilterCoeffs design_butterworth(const FilterSpec& spec) {
  validate(spec);
  using cd = std::complex<double>;
  const double fs = spec.sample_rate_hz;
  const double k = 2.0 * fs;
  const double warped = k * std::tan(std::numbers::pi * spec.cutoff_hz / fs);
  const int n = spec.order;

  FilterCoeffs out;
  // Analog poles p_m = Wc exp(j pi (2m + n + 1) / 2n); the first half holds one member of
  // every conjugate pair, the middle index is the real pole for odd n.
  for (int m = 0; m < n / 2; ++m) {
    const double angle = std::numbers::pi * (2.0 * m + n + 1.0) / (2.0 * n);
    const cd pole = warped * cd(std::cos(angle), std::sin(angle));
    const cd zp = (k + pole) / (k - pole);
    Biquad s;
    s.a1 = -2.0 * zp.real();
    s.a2 = std::norm(zp);
    const double g = (1.0 + s.a1 + s.a2) / 4.0;
    s.b0 = g;
    s.b1 = 2.0 * g;
    s.b2 = g;
    out.sections.push_back(s);
  }
  if (n % 2 == 1) {
    const double zp = (k - warped) / (k + warped);
    Biquad s;
    s.a1 = -zp;
    s.a2 = 0.0;
    const double g = (1.0 - zp) / 2.0;
    s.b0 = g;
    s.b1 = g;
    s.b2 = 0.0;
    out.sections.push_back(s);
  }
  return out;
}

std::complex<double> frequency_response(const FilterCoeffs& coeffs, double freq_hz, double sample_rate_hz) {
  using cd = std::complex<double>;
  const double w = 2.0 * std::numbers::pi * freq_hz / sample_rate_hz;
  const cd z1 = std::polar(1.0, -w);
  const cd z2 = z1 * z1;
  cd h(1.0, 0.0);
  for (const auto& s : coeffs.sections) {
    h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
  }
  return h;
}

bool is_stable(const FilterCoeffs& coeffs) {
  for (const auto& s : coeffs.sections) {
    // Roots of z^2 + a1 z + a2 inside the unit circle (Jury conditions).
    if (!(std::abs(s.a2) < 1.0 && std::abs(s.a1) < 1.0 + s.a2)) return false;
  }
  return true;
}

std::vector<double> filter_signal(const FilterCoeffs& coeffs, std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  for (const auto& s : coeffs.sections) {
    double z1 = 0.0;
    double z2 = 0.0;
    for (auto& v : y) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
  return y;
}

nlohmann::json to_json(const FilterCoeffs& coeffs) {
  nlohmann::json sections = nlohmann::json::array();
  for (const auto& s : coeffs.sections) {
    sections.push_back({{"b0", s.b0}, {"b1", s.b1}, {"b2", s.b2}, {"a1", s.a1}, {"a2", s.a2}});
  }
  return {{"sections", sections}};
}

FilterCoeffs coeffs_from_json(const nlohmann::json& j) {
  using namespace json_fields;
  expect_object(j, "");
  auto it = j.find("sections");
  if (it == j.end() || !it->is_array()) throw ConfigError("field 'sections': expected an array");
  FilterCoeffs out;
  std::size_t idx = 0;
  for (const auto& s : *it) {
    const std::string path = "sections[" + std::to_string(idx++) + "].";
    out.sections.push_back({require<double>(s, path, "b0"), require<double>(s, path, "b1"),
                            require<double>(s, path, "b2"), require<double>(s, path, "a1"),
                            require<double>(s, path, "a2")});
  }
  return out;
}

nlohmann::json to_json(const FilterSpec& spec) {
  return {{"order", spec.order}, {"cutoff_hz", spec.cutoff_hz}, {"sample_rate_hz", spec.sample_rate_hz}};
}

FilterSpec filter_spec_from_json(const nlohmann::json& j, const FilterSpec& defaults) {
  using namespace json_fields;
  reject_unknown(j, "filter.", {"order", "cutoff_hz", "sample_rate_hz"});
  FilterSpec s;
  s.order = get_or<int>(j, "filter.", "order", defaults.order);
  s.cutoff_hz = get_or<double>(j, "filter.", "cutoff_hz", defaults.cutoff_hz);
  s.sample_rate_hz = get_or<double>(j, "filter.", "sample_rate_hz", defaults.sample_rate_hz);
  return s;
}

}  // namespace magclimb::dsp
