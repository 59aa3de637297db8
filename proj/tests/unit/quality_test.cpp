#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "magclimb/common/errors.hpp"
#include "magclimb/quality/metrics.hpp"

namespace {

using namespace magclimb;
using namespace magclimb::quality;

std::vector<double> sine(double f, double fs, std::size_t n, double amp = 1.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::sin(2 * std::numbers::pi * f * i / fs);
  return x;
}

TEST(Energy, Examples) {
  EXPECT_EQ(signal_energy(std::vector<double>{1, -1, 1, -1}), 4.0);
  EXPECT_EQ(signal_energy(std::vector<double>(7, 0.0)), 0.0);
  EXPECT_EQ(signal_energy(std::vector<double>{3, 4}), 25.0);
}

TEST(Std, Examples) {
  EXPECT_EQ(signal_std(std::vector<double>{2, 2, 2}), 0.0);
  EXPECT_NEAR(signal_std(std::vector<double>{0, 2}), std::sqrt(2.0), 1e-15);
  const std::vector<double> x{1, 5, -2, 7.5};
  std::vector<double> twice;
  for (double v : x) twice.push_back(2 * v);
  EXPECT_NEAR(signal_std(twice), 2 * signal_std(x), 1e-12);
  EXPECT_THROW(signal_std(std::vector<double>{1}), DataError);
}

TEST(Kurtosis, MonteCarlo) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> u;
  std::vector<double> g(200000), un(200000);
  for (auto& v : g) v = n(rng);
  for (auto& v : un) v = u(rng);
  EXPECT_NEAR(excess_kurtosis(g), 0.0, 0.1);
  EXPECT_NEAR(excess_kurtosis(un), -1.2, 0.05);
  EXPECT_NEAR(excess_kurtosis(std::vector<double>{1, -1, 1, -1}), -2.0, 1e-12);
  EXPECT_THROW(excess_kurtosis(std::vector<double>{3, 3, 3, 3}), DegenerateError);
  EXPECT_THROW(excess_kurtosis(std::vector<double>{1, 2, 3}), DataError);
}

TEST(Skewness, Examples) {
  EXPECT_NEAR(skewness(std::vector<double>{-1, 0, 1}), 0.0, 1e-15);
  const std::vector<double> x{0.5, 3, -1, 8, 2};
  std::vector<double> neg;
  for (double v : x) neg.push_back(-v);
  EXPECT_NEAR(skewness(neg), -skewness(x), 1e-12);
  std::mt19937_64 rng(2);
  std::exponential_distribution<double> e(1.0);
  std::vector<double> s(200000);
  for (auto& v : s) v = e(rng);
  EXPECT_NEAR(skewness(s), 2.0, 0.1);
  EXPECT_THROW(skewness(std::vector<double>{1, 1, 1}), DegenerateError);
}

TEST(Moments, ShiftAndScaleBehaviour) {
  std::mt19937_64 rng(4);
  std::gamma_distribution<double> g(2.0, 1.5);
  std::vector<double> x(500);
  for (auto& v : x) v = g(rng);
  std::vector<double> shifted, scaled;
  for (double v : x) {
    shifted.push_back(v + 10.0);
    scaled.push_back(3.7 * v);
  }
  EXPECT_NE(signal_energy(shifted), signal_energy(x));
  EXPECT_NEAR(signal_std(shifted), signal_std(x), 1e-9);
  EXPECT_NEAR(skewness(shifted), skewness(x), 1e-9);
  EXPECT_NEAR(excess_kurtosis(shifted), excess_kurtosis(x), 1e-9);
  EXPECT_NEAR(skewness(scaled), skewness(x), 1e-9);
  EXPECT_NEAR(excess_kurtosis(scaled), excess_kurtosis(x), 1e-9);
}

TEST(Welch, WhiteNoiseFlatAndParseval) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 2.0);
  std::vector<double> x(200000);
  for (auto& v : x) v = n(rng);
  const auto psd = psd_welch(x, 100.0, 256, 0.5);
  ASSERT_EQ(psd.freqs.size(), 129u);
  double area = 0;
  for (double d : psd.density) area += d * psd.resolution_hz;
  double mean = 0, var = 0;
  for (double v : x) mean += v;
  mean /= x.size();
  for (double v : x) var += (v - mean) * (v - mean);
  var /= x.size();
  EXPECT_NEAR(area / var, 1.0, 0.05);
  const double level = var / 50.0;
  for (std::size_t i = 1; i + 1 < psd.density.size(); ++i) {
    EXPECT_LT(std::abs(10 * std::log10(psd.density[i] / level)), 3.0) << i;
  }
}

TEST(Welch, SinePeak) {
  const auto psd = psd_welch(sine(5.0, 100.0, 2000), 100.0, 200, 0.5);
  std::size_t best = 0;
  for (std::size_t i = 0; i < psd.density.size(); ++i) {
    if (psd.density[i] > psd.density[best]) best = i;
  }
  EXPECT_DOUBLE_EQ(psd.freqs[best], 5.0);
}

TEST(Welch, RejectsBadConfig) {
  EXPECT_THROW(psd_welch(std::vector<double>(100, 1.0), 100.0, 256, 0.5), ConfigError);
  EXPECT_THROW(psd_welch(std::vector<double>(300, 1.0), 100.0, 256, 1.0), ConfigError);
}

// Independent oracle: naive DFT periodogram of the whole signal.
double dft_centroid(const std::vector<double>& x, double fs) {
  const std::size_t n = x.size();
  double num = 0, den = 0;
  for (std::size_t k = 0; k <= n / 2; ++k) {
    double re = 0, im = 0;
    for (std::size_t t = 0; t < n; ++t) {
      const double ang = 2 * std::numbers::pi * k * t / n;
      re += x[t] * std::cos(ang);
      im -= x[t] * std::sin(ang);
    }
    const double p = re * re + im * im;
    num += p * k * fs / n;
    den += p;
  }
  return num / den;
}

TEST(Centroid, PureSine) {
  const auto x = sine(5.0, 100.0, 1000);
  EXPECT_NEAR(spectral_centroid(x, 100.0), 5.0, 0.1);
  EXPECT_NEAR(dft_centroid(x, 100.0), 5.0, 0.1);
}

TEST(Centroid, TwoTonesAndBounds) {
  auto x = sine(10.0, 100.0, 2000);
  const auto y = sine(30.0, 100.0, 2000);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += y[i];
  EXPECT_NEAR(spectral_centroid(x, 100.0), 20.0, 0.5);
  EXPECT_NEAR(dft_centroid(x, 100.0), 20.0, 0.5);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n;
  std::vector<double> noise(1000);
  for (auto& v : noise) v = n(rng);
  const double c = spectral_centroid(noise, 100.0);
  EXPECT_GE(c, 0.0);
  EXPECT_LE(c, 50.0);
  std::vector<double> scaled;
  for (double v : noise) scaled.push_back(-4.2 * v);
  EXPECT_NEAR(spectral_centroid(scaled, 100.0), c, 1e-9);
  EXPECT_THROW(spectral_centroid(std::vector<double>(500, 0.0), 100.0), DegenerateError);
}

TEST(QualityReport, AllMetricsAndDegenerateFlags) {
  SignalFrame f(100.0, 600);
  f.add_channel("const", std::vector<double>(600, 9.81));
  f.add_channel("tone", sine(7.0, 100.0, 600));
  const auto r = quality_report(f);
  const auto& c = r.channel("const");
  EXPECT_NEAR(c.energy, 9.81 * 9.81 * 600, 1e-6);
  EXPECT_EQ(*c.std, 0.0);
  EXPECT_FALSE(c.excess_kurtosis.has_value());
  EXPECT_FALSE(c.skewness.has_value());
  EXPECT_FALSE(c.degenerate.empty());
  const auto& t = r.channel("tone");
  EXPECT_TRUE(t.degenerate.empty());
  EXPECT_NEAR(*t.spectral_centroid_hz, 7.0, 0.5);
  EXPECT_THROW(r.channel("missing"), LookupError);
  EXPECT_EQ(to_json(r).dump(), to_json(quality_report(f)).dump());
  const auto table = quality_table_csv({"x"}, {r});
  EXPECT_NE(table.find("Energy_const"), std::string::npos);
  EXPECT_NE(table.find("nan"), std::string::npos);
}

}  // namespace
