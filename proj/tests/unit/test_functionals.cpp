#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "taperspec/errors.hpp"
#include "taperspec/functionals.hpp"

using namespace taperspec;

namespace {
constexpr double pi = std::numbers::pi;

// trigonometric polynomial sum a_k cos(k l) with its exact coefficients
GeneratingFunction trig_poly(std::vector<double> a) {
  auto fn = [a](double l) {
    double v = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) v += a[k] * std::cos(static_cast<double>(k) * l);
    return v;
  };
  auto fourier = [a](long t) {
    const auto k = static_cast<std::size_t>(std::abs(t));
    if (k >= a.size()) return 0.0;
    return k == 0 ? 2 * pi * a[0] : pi * a[k];
  };
  return GeneratingFunction::custom(fn, true, "trig", fourier);
}

std::vector<Taper> tapers() { return {Taper::rectangular(), Taper::linear(), Taper::tukey_hanning()}; }
}  // namespace

TEST(GeneratingFunction, FourierCoefficients) {
  const auto c = GeneratingFunction::cosine(3);
  EXPECT_NEAR(c.fourier(3), pi, 0);
  EXPECT_NEAR(c.fourier(-3), pi, 0);
  EXPECT_EQ(c.fourier(2), 0.0);
  EXPECT_NEAR(GeneratingFunction::constant_one().fourier(0), 2 * pi, 0);
  const auto ind = GeneratingFunction::indicator(1.0);
  EXPECT_NEAR(ind.fourier(0), 1.0, 1e-15);
  EXPECT_NEAR(ind.fourier(2), std::sin(2.0) / 2.0, 1e-15);
  // numeric route for a custom g agrees with the closed forms
  const auto num = GeneratingFunction::custom([](double l) { return std::abs(l) <= 1.0 ? 0.5 : 0.0; },
                                              true, "ind-num", {}, {1.0});
  for (long t : {0L, 1L, 2L, 7L}) EXPECT_NEAR(num.fourier(t), ind.fourier(t), 1e-9) << t;
  EXPECT_THROW(GeneratingFunction::custom([](double l) { return l; }, true), DomainError);
  EXPECT_EQ(GeneratingFunction::parse("cos:2").name(), "cos:2");
  EXPECT_THROW(GeneratingFunction::parse("sin:2"), ConfigError);
}

TEST(Functionals, TrueFunctional) {
  EXPECT_EQ(true_functional(SpectralModel::ar1(0.5), GeneratingFunction::zero()), 0.0);
  EXPECT_NEAR(true_functional(SpectralModel::white_noise(), GeneratingFunction::constant_one()), 1.0, 1e-12);
  EXPECT_NEAR(true_functional(SpectralModel::ar1(0.5), GeneratingFunction::cosine(1)), 2.0 / 3.0, 1e-10);
  EXPECT_NEAR(true_functional(SpectralModel::arfima0d0(0.3), GeneratingFunction::cosine(2)),
              SpectralModel::arfima0d0(0.3).covariance(2), 1e-8);
  EXPECT_NEAR(true_functional(SpectralModel::white_noise(), GeneratingFunction::indicator(pi)), 0.5, 1e-12);
}

TEST(Functionals, AsymptoticVarianceExamples) {
  const auto wn = SpectralModel::white_noise();
  const auto one = GeneratingFunction::constant_one();
  const auto rect = Taper::rectangular();
  EXPECT_EQ(asymptotic_variance(wn, GeneratingFunction::zero(), rect, 0.0), 0.0);
  EXPECT_NEAR(asymptotic_variance(wn, one, rect, 0.0), 2.0, 1e-10);
  EXPECT_NEAR(asymptotic_variance(wn, one, rect, 6.0), 8.0, 1e-10);
  // AR(1) 0.5 with cos(1): 4 pi int f^2 cos^2 = 4.59259...; times e(h) for Tukey
  const double v = asymptotic_variance(SpectralModel::ar1(0.5), GeneratingFunction::cosine(1),
                                       Taper::tukey_hanning(), 0.0);
  EXPECT_NEAR(v, 8.93004, 1e-4);
  const double k = asymptotic_variance(SpectralModel::ar1(0.5), GeneratingFunction::cosine(1),
                                       Taper::tukey_hanning(), 6.0);
  EXPECT_NEAR(k - v, 6.0 * 35.0 / 18.0 * 4.0 / 9.0, 1e-8);
  EXPECT_THROW(squared_functional(SpectralModel::arfima0d0(0.3), one), DivergenceError);
}

TEST(Functionals, QuadraticFormIdentity) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const auto hs = tapers();
  for (int trial = 0; trial < 20; ++trial) {
    const auto ts = simulate(SpectralModel::ar1(0.9 * unif(rng)), NoiseDriver(), 256, rng());
    const auto& h = hs[trial % 3];
    std::vector<double> a(1 + trial % 6);
    for (auto& c : a) c = unif(rng);
    const auto g = trig_poly(a);
    const auto p = tapered_periodogram(ts, h, canonical_grid(256, 2));
    const double J = plugin_value(p, g.on_grid(p.grid));
    const double Q = quadratic_form(ts, h, g);
    EXPECT_LT(std::abs(J * p.c_T - Q) / std::abs(Q), 1e-8) << trial;
  }
}

TEST(Functionals, QuadraticFormPaths) {
  const auto ts = simulate(SpectralModel::ar1(0.3), NoiseDriver(), 200, 5);
  const auto h = Taper::tukey_hanning();
  const auto g = GeneratingFunction::indicator(1.1);
  const double q = quadratic_form(ts, h, g);
  EXPECT_NEAR(q, reference::quadratic_form_direct(ts.values, h, g), 1e-10 * std::abs(q));
  std::vector<double> y = ts.values;
  const auto ghat = g.fourier_coefficients(200);
  EXPECT_EQ(kernels::quadratic_form(y, ghat), reference::quadratic_form(y, ghat));
  std::vector<double> ones(8, 1.0);
  EXPECT_NEAR(quadratic_form(ones, Taper::rectangular(), GeneratingFunction::constant_one()), 2 * pi * 8, 1e-12);
  EXPECT_EQ(quadratic_form(std::vector<double>(8, 0.0), h, g), 0.0);
  EXPECT_THROW(quadratic_form(std::vector<double>(kQuadraticFormMaxT + 1, 0.0), h, g), SizeError);
}

TEST(Functionals, ExpectedPluginMatchesMonteCarlo) {
  const auto m = SpectralModel::ar1(0.5);
  const auto g = GeneratingFunction::cosine(1);
  const auto h = Taper::tukey_hanning();
  const std::size_t T = 64;
  const auto grid = canonical_grid(T, 2);
  const auto gv = g.on_grid(grid);
  double acc = 0.0;
  const int R = 4000;
  for (int r = 0; r < R; ++r)
    acc += plugin_value(tapered_periodogram(simulate(m, NoiseDriver(), T, derive_seed(1, r)), h, grid), gv);
  const double sd = std::sqrt(asymptotic_variance(m, g, h, 0.0) / T / R);
  EXPECT_NEAR(acc / R, expected_plugin(m, g, h, T), 4 * sd);
}

TEST(Functionals, FejerSmoothingError) {
  const auto wn = SpectralModel::white_noise();
  EXPECT_NEAR(fejer_smoothing_error(wn, GeneratingFunction::constant_one(), Taper::tukey_hanning(), 64), 0.0, 1e-12);
  const auto m = SpectralModel::ar1(0.5);
  const auto g = GeneratingFunction::cosine(1);
  const auto h = Taper::tukey_hanning();
  // lag-domain oracle: Delta = E J - J exactly for trigonometric g
  for (std::size_t T : {64u, 256u, 1024u}) {
    const double d = fejer_smoothing_error(m, g, h, T);
    EXPECT_NEAR(d, expected_plugin(m, g, h, T) - true_functional(m, g), 1e-10) << T;
  }
  EXPECT_NEAR(fejer_smoothing_error(m, g, h, 64) * 8.0, -0.111, 2e-3);
  std::vector<double> lt, ld;
  double prev = 1e9;
  for (std::size_t T : {64u, 128u, 256u, 512u, 1024u, 2048u}) {
    const double d = fejer_smoothing_error(m, g, h, T);
    const double scaled = std::abs(d) * std::sqrt(static_cast<double>(T));
    EXPECT_LT(scaled, prev);
    prev = scaled;
    lt.push_back(std::log(static_cast<double>(T)));
    ld.push_back(std::log(std::abs(d)));
  }
  EXPECT_LT(prev, 0.05);
  const double slope = (ld.back() - ld.front()) / (lt.back() - lt.front());
  EXPECT_LE(slope, -0.85);
  // long memory density: finite and shrinking
  const auto lm = SpectralModel::arfima0d0(0.2);
  EXPECT_GT(std::abs(fejer_smoothing_error(lm, g, h, 64)), std::abs(fejer_smoothing_error(lm, g, h, 1024)));
}

TEST(Functionals, CovarianceEstimateMonteCarlo) {
  const auto m = SpectralModel::ar1(0.5);
  const auto h = Taper::tukey_hanning();
  const std::size_t T = 4096;
  const int R = 500;
  std::vector<double> v(R);
  FunctionalEstimate last;
  for (int r = 0; r < R; ++r) {
    last = covariance_estimate(simulate(m, NoiseDriver(), T, derive_seed(11, r)), h, 1, {m, 0.0}, 2);
    v[r] = last.value;
  }
  double mean = 0.0, var = 0.0;
  for (double x : v) mean += x / R;
  for (double x : v) var += (x - mean) * (x - mean) / (R - 1);
  EXPECT_NEAR(mean / (2.0 / 3.0), 1.0, 0.02);
  const double sigma2 = asymptotic_variance(m, GeneratingFunction::cosine(1), h, 0.0);
  EXPECT_NEAR(T * var / sigma2, 1.0, 0.15);  // R = 500: sd of the ratio is ~0.063
  EXPECT_NEAR(last.variance_hat * T, sigma2, 1e-9);
  EXPECT_EQ(last.variance_source, "model");
  // Bartlett fallback lands in the right range
  const auto b = covariance_estimate(simulate(m, NoiseDriver(), T, 77), h, 1);
  EXPECT_EQ(b.variance_source, "bartlett");
  EXPECT_NEAR(b.variance_hat * T / sigma2, 1.0, 0.3);
}

TEST(Functionals, SpectralFunctionEstimate) {
  const auto wn = SpectralModel::white_noise();
  const auto h = Taper::rectangular();
  double acc = 0.0, acc2 = 0.0;
  const int R = 1000;
  const std::size_t T = 1024;
  for (int r = 0; r < R; ++r) {
    const double v = spectral_function_estimate(simulate(wn, NoiseDriver(), T, derive_seed(5, r)), h, pi / 2).value;
    acc += v;
    acc2 += v * v;
  }
  const double mean = acc / R;
  const double var = acc2 / R - mean * mean;
  EXPECT_NEAR(mean, 0.25, 0.01);
  // T Var -> 2 pi e(h) int_0^mu f^2 = 2 pi (pi/2) / (4 pi^2) = 0.25
  EXPECT_NEAR(T * var / 0.25, 1.0, 0.15);
  const auto est = spectral_function_estimate(simulate(wn, NoiseDriver(), T, 1), h, pi, {wn, 0.0});
  EXPECT_NEAR(est.value, 0.5, 0.1);
  EXPECT_NEAR(est.variance_hat * T, 2 * pi * pi / (4 * pi * pi), 1e-9);
  EXPECT_THROW(spectral_function_estimate(simulate(wn, NoiseDriver(), 16, 1), h, 4.0), DomainError);
}

TEST(Functionals, LaggedProductsKernelsAgree) {
  const auto ts = simulate(SpectralModel::ar1(0.2), NoiseDriver(), 1000, 3);
  EXPECT_EQ(kernels::lagged_products(ts.values, 999), reference::lagged_products(ts.values, 999));
}
