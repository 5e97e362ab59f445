#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "taperspec/errors.hpp"
#include "taperspec/spectrum.hpp"

using namespace taperspec;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST(Spectrum, CanonicalGrid) {
  const auto g4 = canonical_grid(4, 1);
  ASSERT_EQ(g4.size(), 4u);
  double total = 0.0;
  for (double w : g4.weights) {
    EXPECT_NEAR(w, pi / 2, 1e-15);
    total += w;
  }
  EXPECT_NEAR(total, 2 * pi, 1e-14);
  EXPECT_NEAR(g4.points.back(), pi, 1e-15);
  EXPECT_EQ(canonical_grid(100, 4).size(), 512u);
  const auto s = canonical_grid(100, 2, true);
  EXPECT_NEAR(s.points.front(), -s.points.back(), 1e-14);
  for (double l : s.points) EXPECT_NE(l, 0.0);
  EXPECT_THROW(canonical_grid(10, 3), DomainError);
}

TEST(Spectrum, DftBasics) {
  const auto rect = Taper::rectangular();
  std::vector<double> ones(4, 1.0), zeros(16, 0.0);
  EXPECT_NEAR(std::abs(tapered_dft(ones, rect, 0.0) - 4.0), 0.0, 1e-15);
  EXPECT_EQ(std::abs(tapered_dft(zeros, Taper::tukey_hanning(), 1.3)), 0.0);
  const auto d1 = tapered_dft(std::vector<double>{0.3, -1.2, 2.0}, rect, 0.7);
  const auto d2 = tapered_dft(std::vector<double>{0.3, -1.2, 2.0}, rect, -0.7);
  EXPECT_NEAR(std::abs(d1 - std::conj(d2)), 0.0, 1e-14);
}

TEST(Spectrum, ConstantSeriesPeriodogram) {
  std::vector<double> ones(4, 1.0);
  const auto grid = FrequencyGrid::custom({0.0}, {2 * pi});
  const auto p = tapered_periodogram(ones, Taper::rectangular(), grid);
  EXPECT_NEAR(p.values[0], 2.0 / pi, 1e-14);
  EXPECT_NEAR(p.c_T, 2 * pi * 4, 1e-13);
}

TEST(Spectrum, FftMatchesDirectSummation) {
  const auto ts = simulate(SpectralModel::ar1(0.6), NoiseDriver(), 300, 4);
  for (const auto& h : {Taper::rectangular(), Taper::linear(), Taper::tukey_hanning()})
    for (std::size_t os : {1u, 2u, 4u})
      for (bool shifted : {false, true}) {
        const auto grid = canonical_grid(300, os, shifted);
        const auto a = kernels::periodogram_fft(ts.values, h, grid);
        const auto b = reference::periodogram_direct(ts.values, h, grid);
        double scale = 0.0;
        for (double v : b.values) scale = std::max(scale, v);
        for (std::size_t j = 0; j < grid.size(); ++j)
          ASSERT_NEAR(a.values[j], b.values[j], 1e-10 * scale) << h.name() << " os=" << os;
      }
}

TEST(Spectrum, ParsevalAndEvenness) {
  const auto ts = simulate(SpectralModel::ar1(-0.4), NoiseDriver(), 257, 8);
  const auto h = Taper::tukey_hanning();
  const auto grid = canonical_grid(257, 2);
  const auto p = tapered_periodogram(ts, h, grid);
  double lhs = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) lhs += p.values[j] * grid.weights[j];
  const auto w = h.weights(257);
  double num = 0.0, den = 0.0;
  for (std::size_t t = 0; t < 257; ++t) {
    num += w[t] * w[t] * ts.values[t] * ts.values[t];
    den += w[t] * w[t];
  }
  EXPECT_NEAR(lhs, num / den, 1e-8 * num / den);
  // I(-l) = I(l): points j and N - j mirror each other on the unshifted grid
  const std::size_t N = grid.size();
  for (std::size_t j = 1; j < N / 2; ++j)
    EXPECT_NEAR(p.values[N / 2 - 1 - j], p.values[N / 2 - 1 + j], 1e-12 * p.values[N / 2 - 1 + j]);
  for (double v : p.values) EXPECT_GE(v, 0.0);
}

TEST(Spectrum, RectangularIsOrdinaryPeriodogram) {
  const auto ts = simulate(SpectralModel::white_noise(), NoiseDriver(), 64, 1);
  const auto grid = canonical_grid(64, 1);
  const auto p = tapered_periodogram(ts, Taper::rectangular(), grid);
  EXPECT_NEAR(p.c_T, 2 * pi * 64, 1e-12);
  for (std::size_t j = 0; j < grid.size(); j += 7) {
    std::complex<double> d{0, 0};
    for (std::size_t t = 0; t < 64; ++t) d += ts.values[t] * std::polar(1.0, -grid.points[j] * (t + 1.0));
    EXPECT_NEAR(p.values[j], std::norm(d) / (2 * pi * 64), 1e-12);
  }
}

TEST(Spectrum, WhiteNoiseMeanLevel) {
  const auto grid = canonical_grid(1024, 1);
  const auto h = Taper::tukey_hanning();
  double acc = 0.0;
  const int R = 200;
  for (int r = 0; r < R; ++r) {
    const auto ts = simulate(SpectralModel::white_noise(), NoiseDriver(), 1024, derive_seed(3, r));
    const auto p = tapered_periodogram(ts, h, grid);
    for (double v : p.values) acc += v;
  }
  acc /= R * grid.size();
  EXPECT_NEAR(acc * 2 * pi, 1.0, 0.02);
}

TEST(Spectrum, CsvExport) {
  std::vector<double> x{1.0, 2.0, 0.5};
  const auto p = tapered_periodogram(x, Taper::rectangular(), canonical_grid(3, 1));
  std::ostringstream os;
  write_periodogram_csv(p, os);
  const auto s = os.str();
  EXPECT_EQ(s.rfind("lambda,value\r\n", 0), 0u);
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 5);
}
