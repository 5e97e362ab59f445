#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "taperspec/errors.hpp"
#include "taperspec/whittle.hpp"

using namespace taperspec;

namespace {
constexpr double pi = std::numbers::pi;

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}
}  // namespace

TEST(Whittle, InfoMatricesOracles) {
  const auto ar = SpectralModel::ar1(0.0);
  const std::vector<double> zero{0.0}, half{0.5};
  const auto i0 = info_matrices(ar, zero);
  EXPECT_NEAR(i0.W(0, 0), 1.0, 1e-10);
  EXPECT_NEAR(i0.A(0, 0), i0.W(0, 0), 1e-8);
  EXPECT_EQ(i0.B(0, 0), 0.0);
  // W = 1/(1 - phi^2), the Fisher information of the AR coefficient
  const auto i5 = info_matrices(ar, half, {}, 0.0, Taper::tukey_hanning());
  EXPECT_NEAR(i5.W(0, 0), 4.0 / 3.0, 1e-9);
  EXPECT_NEAR(i5.Gamma(0, 0), 0.75, 1e-9);
  EXPECT_NEAR(i5.asym_cov(0, 0), 0.75 * 35.0 / 18.0, 1e-8);
  // kappa4 only matters through a non-centred score
  EXPECT_NEAR(info_matrices(ar, half, {}, 6.0).Gamma(0, 0), 0.75, 1e-9);
  // (1/4pi) int 4 ln^2|2 sin(l/2)| = pi^2/6
  const auto fd = info_matrices(SpectralModel::arfima0d0(0.2), std::vector<double>{0.2});
  EXPECT_NEAR(fd.W(0, 0), pi * pi / 6.0, 1e-7);
  // white noise: Var of the variance estimate is (2 + kappa4) sigma^4
  const auto wn = info_matrices(SpectralModel::white_noise(), std::vector<double>{2.0}, {}, 6.0);
  EXPECT_NEAR(wn.Gamma(0, 0), 8.0 * 4.0, 1e-8);
  // weighted: A uses w^2, so A differs from W
  const WeightFunction w = [](double l) { return 1.0 / (1.0 + l * l); };
  const auto iw = info_matrices(ar, half, w);
  EXPECT_LT(iw.A(0, 0), iw.W(0, 0));
  // ARMA(1,1): symmetric positive definite 2 x 2
  const auto arma = SpectralModel::arma({0.5}, {0.3});
  const auto ia = info_matrices(arma, std::vector<double>{0.5, 0.3});
  EXPECT_NEAR(ia.W(0, 1), ia.W(1, 0), 1e-14);
  EXPECT_GT(ia.W.determinant(), 0.0);
  // fgn: profiling the scale can only increase the shape variance
  const std::vector<double> h{0.7};
  const auto fp = info_matrices(SpectralModel::fgn(0.7), h);
  const auto fu = info_matrices(SpectralModel::fgn(0.7), h, {}, 0.0, Taper::rectangular(), false);
  EXPECT_GE(fp.Gamma(0, 0), fu.Gamma(0, 0));
  EXPECT_NEAR(fu.Gamma(0, 0), 1.0 / fu.W(0, 0), 1e-10);
}

TEST(Whittle, ObjectiveWhiteNoiseMinimizer) {
  const auto ts = simulate(SpectralModel::white_noise(2.0), NoiseDriver(), 1024, 3);
  const auto p = tapered_periodogram(ts, Taper::rectangular(), canonical_grid(1024, 2));
  const auto fam = SpectralModel::white_noise();
  const auto fit = whittle_estimate(ts, Taper::rectangular(), fam);
  double mean_level = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) mean_level += p.values[j] * p.grid.weights[j];
  EXPECT_NEAR(fit.theta_hat[0], mean_level, 1e-12);
  const double s = fit.theta_hat[0];
  const double at = whittle_objective(p, fam, std::vector<double>{s});
  for (double d : {-0.05, -0.01, 0.01, 0.05})
    EXPECT_LT(at, whittle_objective(p, fam, std::vector<double>{s + d}));
  EXPECT_NEAR(s, 2.0, 0.2);
  // f <= 0 on the grid is an error
  EXPECT_THROW(whittle_objective(p, fam, std::vector<double>{-1.0}), DomainError);
}

TEST(Whittle, ObjectiveSeparatesAr1) {
  const auto m = SpectralModel::ar1(0.5);
  int wins = 0;
  for (int r = 0; r < 100; ++r) {
    const auto ts = simulate(m, NoiseDriver(), 256, derive_seed(8, r));
    const auto p = tapered_periodogram(ts, Taper::tukey_hanning(), canonical_grid(256, 2));
    wins += whittle_objective(p, m, std::vector<double>{0.5}) <
            whittle_objective(p, m, std::vector<double>{-0.5});
  }
  EXPECT_GT(wins, 50);
}

TEST(Whittle, ObjectiveGridRefinement) {
  const auto m = SpectralModel::arma({0.4}, {0.2});
  const auto ts = simulate(m, NoiseDriver(), 500, 12);
  const std::vector<double> th{0.3, 0.1};
  const auto h = Taper::tukey_hanning();
  const double a = whittle_objective(tapered_periodogram(ts, h, canonical_grid(500, 4)), m, th);
  const double b = whittle_objective(tapered_periodogram(ts, h, canonical_grid(500, 8)), m, th);
  EXPECT_NEAR(a, b, 1e-6);
  // weight function w = 1 reproduces the unweighted objective
  const auto p = tapered_periodogram(ts, h, canonical_grid(500, 4));
  EXPECT_EQ(whittle_objective(p, m, th, [](double) { return 1.0; }), whittle_objective(p, m, th));
}

TEST(Whittle, Ar1Consistency) {
  const auto m = SpectralModel::ar1(0.5);
  const auto h = Taper::tukey_hanning();
  int hits = 0;
  for (int r = 0; r < 200; ++r) {
    const auto fit = whittle_estimate(simulate(m, NoiseDriver(), 4096, derive_seed(21, r)), h, m);
    ASSERT_TRUE(fit.converged);
    hits += std::abs(fit.theta_hat[0] - 0.5) < 0.05;
  }
  EXPECT_GE(hits, 180);
  std::vector<double> med;
  for (std::size_t T : {512u, 2048u, 8192u}) {
    std::vector<double> err;
    for (int r = 0; r < 60; ++r)
      err.push_back(std::abs(whittle_estimate(simulate(m, NoiseDriver(), T, derive_seed(T, r)), h, m).theta_hat[0] - 0.5));
    med.push_back(median(err));
  }
  EXPECT_GT(med[0], med[1]);
  EXPECT_GT(med[1], med[2]);
}

TEST(Whittle, FitFieldsAndScale) {
  const auto m = SpectralModel::ar1(0.5, 3.0);
  const auto fit = whittle_estimate(simulate(m, NoiseDriver(), 4096, 5), Taper::tukey_hanning(), m);
  EXPECT_NEAR(fit.scale_hat, 3.0, 0.3);
  EXPECT_NEAR(fit.asym_cov(0, 0), 35.0 / 18.0 * (1 - std::pow(fit.theta_hat[0], 2)), 1e-8);
  EXPECT_NEAR(fit.se[0], std::sqrt(fit.asym_cov(0, 0) / 4096), 1e-15);
  const auto fm = fitted_model(m, fit);
  EXPECT_EQ(fm.theta()[0], fit.theta_hat[0]);
  EXPECT_EQ(fm.scale(), fit.scale_hat);
}

TEST(Whittle, LongMemoryAndArma) {
  const auto fd = SpectralModel::arfima0d0(0.3);
  std::vector<double> d;
  for (int r = 0; r < 15; ++r)
    d.push_back(whittle_estimate(simulate(fd, NoiseDriver(), 8192, derive_seed(4, r)), Taper::tukey_hanning(), fd).theta_hat[0]);
  EXPECT_NEAR(median(d), 0.3, 0.05);

  const auto arma = SpectralModel::arma({0.6}, {-0.3});
  const auto fit = whittle_estimate(simulate(arma, NoiseDriver(), 4096, 17), Taper::tukey_hanning(), arma);
  EXPECT_TRUE(fit.converged);
  EXPECT_NEAR(fit.theta_hat[0], 0.6, 0.12);
  EXPECT_NEAR(fit.theta_hat[1], -0.3, 0.12);
  EXPECT_EQ(fit.asym_cov.rows(), 2);
}

TEST(Whittle, RectangularVarianceIsFisher) {
  const auto m = SpectralModel::ar1(0.5);
  const std::size_t T = 2048;
  const int R = 1000;
  double acc = 0.0, acc2 = 0.0;
  for (int r = 0; r < R; ++r) {
    const double z = std::sqrt(double(T)) *
                     (whittle_estimate(simulate(m, NoiseDriver(), T, derive_seed(77, r)), Taper::rectangular(), m).theta_hat[0] - 0.5);
    acc += z;
    acc2 += z * z;
  }
  const double var = acc2 / R - (acc / R) * (acc / R);
  EXPECT_NEAR(var / 0.75, 1.0, 0.15);
}
