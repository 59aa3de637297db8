#include "magclimb/quality/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "magclimb/common/errors.hpp"
#include "magclimb/common/io.hpp"

namespace magclimb::quality {

namespace {

double mean_of(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

bool is_constant(std::span<const double> x) {
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  return !(*hi > *lo);
}

struct Moments {
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
};

Moments central_moments(std::span<const double> x) {
  const double mu = mean_of(x);
  Moments m;
  for (double v : x) {
    const double d = v - mu;
    const double d2 = d * d;
    m.m2 += d2;
    m.m3 += d2 * d;
    m.m4 += d2 * d2;
  }
  const double n = static_cast<double>(x.size());
  m.m2 /= n;
  m.m3 /= n;
  m.m4 /= n;
  return m;
}

// FFTW planning is not thread-safe; execution with new-array functions is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

double signal_energy(std::span<const double> x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e;
}

double signal_std(std::span<const double> x) {
  if (x.size() < 2) throw DataError("std needs at least 2 samples");
  if (is_constant(x)) return 0.0;
  const double mu = mean_of(x);
  double ss = 0.0;
  for (double v : x) ss += (v - mu) * (v - mu);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

double excess_kurtosis(std::span<const double> x) {
  if (x.size() < 4) throw DataError("kurtosis needs at least 4 samples");
  if (is_constant(x)) throw DegenerateError("kurtosis undefined for zero variance");
  const auto m = central_moments(x);
  return m.m4 / (m.m2 * m.m2) - 3.0;
}

double skewness(std::span<const double> x) {
  if (x.size() < 3) throw DataError("skewness needs at least 3 samples");
  if (is_constant(x)) throw DegenerateError("skewness undefined for zero variance");
  const auto m = central_moments(x);
  return m.m3 / std::pow(m.m2, 1.5);
}

Psd psd_welch(std::span<const double> x, double fs, std::size_t seg, double overlap) {
  if (!(fs > 0.0)) throw ConfigError("sample rate must be positive");
  if (seg < 2) throw ConfigError("Welch segment length must be >= 2");
  if (seg > x.size()) {
    throw ConfigError("Welch segment length " + std::to_string(seg) + " exceeds signal length " +
                      std::to_string(x.size()));
  }
  if (!(overlap >= 0.0 && overlap < 1.0)) throw ConfigError("Welch overlap must lie in [0, 1)");
  const auto step = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(seg * (1.0 - overlap))));
  const std::size_t nseg = (x.size() - seg) / step + 1;
  const std::size_t nbins = seg / 2 + 1;

  // Periodic Hann window.
  std::vector<double> window(seg);
  double wss = 0.0;
  for (std::size_t i = 0; i < seg; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(seg));
    wss += window[i] * window[i];
  }

  double* in = fftw_alloc_real(seg);
  fftw_complex* out = fftw_alloc_complex(nbins);
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(seg), in, out, FFTW_ESTIMATE);
  }

  Psd psd;
  psd.resolution_hz = fs / static_cast<double>(seg);
  psd.freqs.resize(nbins);
  psd.density.assign(nbins, 0.0);
  for (std::size_t k = 0; k < nbins; ++k) psd.freqs[k] = static_cast<double>(k) * psd.resolution_hz;

  for (std::size_t s = 0; s < nseg; ++s) {
    const auto part = x.subspan(s * step, seg);
    const double mu = mean_of(part);
    for (std::size_t i = 0; i < seg; ++i) in[i] = (part[i] - mu) * window[i];
    fftw_execute_dft_r2c(plan, in, out);
    for (std::size_t k = 0; k < nbins; ++k) psd.density[k] += out[k][0] * out[k][0] + out[k][1] * out[k][1];
  }

  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(out);

  const double scale = 1.0 / (fs * wss * static_cast<double>(nseg));
  for (std::size_t k = 0; k < nbins; ++k) {
    const bool unpaired = (k == 0) || (seg % 2 == 0 && k == nbins - 1);
    psd.density[k] *= unpaired ? scale : 2.0 * scale;
  }
  return psd;
}

double spectral_centroid(const Psd& psd) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < psd.freqs.size(); ++k) {
    num += psd.freqs[k] * psd.density[k];
    den += psd.density[k];
  }
  if (!(den > 0.0)) throw DegenerateError("spectral centroid undefined for an all-zero spectrum");
  return num / den;
}

double spectral_centroid(std::span<const double> x, double fs, const WelchConfig& welch) {
  if (x.size() < 2) throw DataError("spectral centroid needs at least 2 samples");
  const std::size_t seg = std::min(welch.segment_len, x.size());
  return spectral_centroid(psd_welch(x, fs, seg, welch.overlap));
}

const ChannelQuality& QualityReport::channel(const std::string& name) const {
  for (const auto& c : channels) {
    if (c.name == name) return c;
  }
  throw LookupError("quality report has no channel '" + name + "'");
}

QualityReport quality_report(const SignalFrame& frame, const WelchConfig& welch) {
  frame.validate();
  QualityReport report;
  report.sample_rate_hz = frame.sample_rate_hz();
  report.welch = welch;
  for (const auto& ch : frame.channels()) {
    ChannelQuality q;
    q.name = ch.name;
    const std::span<const double> x(ch.samples);
    q.energy = signal_energy(x);
    auto attempt = [&](const char* metric, auto&& fn) -> std::optional<double> {
      try {
        return fn();
      } catch (const DataError&) {
        q.degenerate.emplace_back(metric);
        return std::nullopt;
      }
    };
    q.std = attempt("std", [&] { return signal_std(x); });
    q.excess_kurtosis = attempt("excess_kurtosis", [&] { return excess_kurtosis(x); });
    q.skewness = attempt("skewness", [&] { return skewness(x); });
    if (x.size() >= 2) {
      q.psd = psd_welch(x, frame.sample_rate_hz(), std::min(welch.segment_len, x.size()), welch.overlap);
      q.spectral_centroid_hz = attempt("spectral_centroid", [&] { return spectral_centroid(q.psd); });
    } else {
      q.degenerate.emplace_back("psd");
      q.degenerate.emplace_back("spectral_centroid");
    }
    report.channels.push_back(std::move(q));
  }
  return report;
}

nlohmann::json to_json(const QualityReport& r) {
  nlohmann::json channels = nlohmann::json::array();
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  for (const auto& c : r.channels) {
    channels.push_back({{"name", c.name},
                        {"energy", c.energy},
                        {"std", opt(c.std)},
                        {"excess_kurtosis", opt(c.excess_kurtosis)},
                        {"skewness", opt(c.skewness)},
                        {"spectral_centroid_hz", opt(c.spectral_centroid_hz)},
                        {"psd", {{"freqs_hz", c.psd.freqs}, {"density", c.psd.density}}},
                        {"degenerate", c.degenerate}});
  }
  return {{"sample_rate_hz", r.sample_rate_hz},
          {"welch", {{"segment_len", r.welch.segment_len}, {"overlap", r.welch.overlap}}},
          {"channels", channels}};
}

std::string quality_table_csv(const std::vector<std::string>& column_names, const std::vector<QualityReport>& reports) {
  if (column_names.size() != reports.size()) throw ConfigError("quality table: column/report count mismatch");
  std::string out = "metric";
  for (const auto& c : column_names) out += "," + c;
  out += '\n';
  if (reports.empty()) return out;
  auto cell = [](const std::optional<double>& v) { return v ? io::format_double(*v) : std::string("nan"); };
  const std::pair<const char*, std::optional<double> ChannelQuality::*> rows[] = {
      {"STD_", &ChannelQuality::std},
      {"Kurtosis_", &ChannelQuality::excess_kurtosis},
      {"Skewness_", &ChannelQuality::skewness},
      {"Spectral_Centroid_", &ChannelQuality::spectral_centroid_hz},
  };
  // Metric-major rows: Energy_a, Energy_b, STD_a, STD_b, ...
  const auto& first = reports.front().channels;
  for (const auto& ch : first) {
    out += "Energy_" + ch.name;
    for (const auto& r : reports) out += "," + io::format_double(r.channel(ch.name).energy);
    out += '\n';
  }
  for (const auto& [prefix, member] : rows) {
    for (const auto& ch : first) {
      out += prefix + ch.name;
      for (const auto& r : reports) out += "," + cell(r.channel(ch.name).*member);
      out += '\n';
    }
  }
  return out;
}

}  // namespace magclimb::quality
