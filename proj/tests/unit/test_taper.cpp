#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "taperspec/errors.hpp"
#include "taperspec/taper.hpp"

using namespace taperspec;

namespace {
constexpr double pi = std::numbers::pi;

// plain trapezoid over the periodic kernel; exact for trig polynomials of degree < n
double kernel_mass(const Taper& h, std::size_t T, double delta = -1.0) {
  const std::size_t n = 1 << 14;
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double u = -pi + 2.0 * pi * static_cast<double>(j) / n;
    if (delta >= 0.0 && std::abs(u) <= delta) continue;
    acc += fejer_kernel2(h, T, u);
  }
  return acc * 2.0 * pi / n;
}
}  // namespace

TEST(Taper, MomentsMatchClosedForms) {
  const auto rect = Taper::rectangular();
  const auto lin = Taper::linear();
  const auto tuk = Taper::tukey_hanning();
  EXPECT_NEAR(taper_moment(rect, 2), 1.0, 1e-10);
  EXPECT_NEAR(taper_moment(rect, 4), 1.0, 1e-10);
  EXPECT_NEAR(taper_moment(lin, 1), 0.5, 1e-10);
  EXPECT_NEAR(taper_moment(lin, 2), 1.0 / 3.0, 1e-10);
  EXPECT_NEAR(taper_moment(lin, 4), 1.0 / 5.0, 1e-10);
  EXPECT_NEAR(taper_moment(tuk, 1), 0.5, 1e-10);
  EXPECT_NEAR(taper_moment(tuk, 2), 3.0 / 8.0, 1e-10);
  EXPECT_NEAR(taper_moment(tuk, 4), 35.0 / 128.0, 1e-10);
  // beyond the cache
  EXPECT_NEAR(taper_moment(lin, 9), 0.1, 1e-10);
}

TEST(Taper, Factor) {
  EXPECT_NEAR(tapering_factor(Taper::rectangular()), 1.0, 1e-10);
  EXPECT_NEAR(tapering_factor(Taper::linear()), 1.8, 1e-9);
  EXPECT_NEAR(tapering_factor(Taper::tukey_hanning()), 35.0 / 18.0, 1e-9);
  EXPECT_GE(Taper::custom([](double t) { return t * t; }, true).factor(), 1.0);
}

TEST(Taper, EvaluationAndNames) {
  const auto tuk = Taper::from_name("tukey");
  EXPECT_EQ(tuk.id(), TaperId::tukey_hanning);
  EXPECT_DOUBLE_EQ(tuk(1.5), 0.0);
  EXPECT_DOUBLE_EQ(tuk(-0.1), 0.0);
  EXPECT_NEAR(tuk(0.5), 0.5, 1e-15);
  EXPECT_THROW(Taper::from_name("hamming"), InvalidTaperError);
}

TEST(Taper, CustomValidation) {
  EXPECT_THROW(Taper::custom([](double t) { return t - 0.5; }, true), InvalidTaperError);
  EXPECT_THROW(Taper::custom([](double) { return 0.0; }, true), InvalidTaperError);
  EXPECT_NO_THROW(Taper::custom([](double t) { return std::sin(pi * t); }, true, "sine"));
}

TEST(Taper, DirichletKernel) {
  const auto rect = Taper::rectangular();
  EXPECT_NEAR(std::abs(dirichlet_kernel(rect, 1, 4, 0.0) - 4.0), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(dirichlet_kernel(rect, 1, 4, pi / 2)), 0.0, 1e-14);
  const auto tuk = Taper::tukey_hanning();
  double direct = 0.0;
  for (int t = 1; t <= 8; ++t) direct += std::pow(0.5 * (1 - std::cos(pi * t / 8.0)), 2);
  EXPECT_NEAR(dirichlet_kernel(tuk, 2, 8, 0.0).real(), direct, 1e-13);
  // H_{k,T}(0)/T -> H_k
  for (int k : {1, 2, 4}) {
    const double ratio = dirichlet_kernel(tuk, k, 1024, 0.0).real() / 1024.0;
    EXPECT_LT(std::abs(ratio / tuk.moment(k) - 1.0), 0.01);
  }
}

TEST(Taper, FejerKernelValues) {
  const auto rect = Taper::rectangular();
  const double u0 = 0.0;
  EXPECT_NEAR(fejer_kernel(rect, 2, 4, std::span(&u0, 1)).real(), 16.0 / (2 * pi * 4), 1e-13);
  const double u1 = pi / 2;
  EXPECT_NEAR(std::abs(fejer_kernel(rect, 2, 4, std::span(&u1, 1))), 0.0, 1e-14);
  const std::vector<double> u3{0.3, -0.1};
  EXPECT_NO_THROW(fejer_kernel(rect, 3, 16, u3));
  const std::vector<double> u4{0.1, 0.2, 0.3};
  EXPECT_THROW(fejer_kernel(rect, 4, 16, u4), UnsupportedError);
  EXPECT_THROW(fejer_kernel(rect, 3, 16, std::span(&u0, 1)), ShapeError);
}

TEST(Taper, FejerNormalizationAndConcentration) {
  for (const auto& h : {Taper::rectangular(), Taper::linear(), Taper::tukey_hanning()}) {
    for (std::size_t T : {16u, 64u, 256u}) EXPECT_NEAR(kernel_mass(h, T), 1.0, 1e-6) << h.name();
    double prev = 1.0;
    for (std::size_t T : {16u, 64u, 256u, 1024u}) {
      const double tail = kernel_mass(h, T, 0.5);
      EXPECT_LT(tail, prev) << h.name() << " T=" << T;
      prev = tail;
    }
  }
}

TEST(Taper, FejerGridMatchesDirect) {
  const auto tuk = Taper::tukey_hanning();
  const std::size_t T = 50, n = 256;
  const auto grid = fejer_kernel2_on_grid(tuk, T, n);
  for (std::size_t j = 0; j < n; j += 17) {
    const double u = -pi + 2.0 * pi * static_cast<double>(j) / n;
    EXPECT_NEAR(grid[j], fejer_kernel2(tuk, T, u), 1e-12);
  }
}
