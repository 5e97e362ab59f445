#include <gtest/gtest.h>

#include <cmath>

#include "taperspec/errors.hpp"
#include "taperspec/robustness.hpp"

using namespace taperspec;

TEST(Robustness, TrendConstruction) {
  const auto t = Trend::power_decay(1.0, 0.6);
  EXPECT_EQ(t(1), 1.0);
  EXPECT_NEAR(t(16), std::pow(16.0, -0.6), 1e-15);
  EXPECT_THROW(Trend::power_decay(1.0, 0.25), DomainError);
  EXPECT_NO_THROW(Trend::power_decay_unchecked(1.0, 0.1));
  EXPECT_FALSE(Trend::power_decay_unchecked(1.0, 0.1).in_theorem_range());
  EXPECT_TRUE(t.in_theorem_range());
  EXPECT_THROW(t(0), DomainError);
  EXPECT_EQ(Trend::parse("power:2,0.8")(1), 2.0);
  EXPECT_EQ(Trend::parse("zero").kind(), TrendKind::zero);
  EXPECT_THROW(Trend::parse("power:1"), ConfigError);
  EXPECT_THROW(Trend::parse("linear:1,2"), ConfigError);
  EXPECT_THROW(Trend::parse("power:1,0.2"), DomainError);
  EXPECT_EQ(Trend::parse(t.spec())(7), t(7));
  for (std::size_t s = 1; s < 50; ++s) EXPECT_LE(std::abs(t(s)), 1.0 * std::pow(double(s), -0.6) + 1e-15);
}

TEST(Robustness, Contaminate) {
  const auto x = simulate(SpectralModel::ar1(0.5), NoiseDriver(), 64, 9);
  const auto z = contaminate(x, Trend::zero());
  EXPECT_EQ(z.values, x.values);
  const auto t = Trend::power_decay(1.0, 0.6);
  const auto y = contaminate(x, t);
  EXPECT_EQ(y.values[0], x.values[0] + 1.0);
  EXPECT_NEAR(y.values[15], x.values[15] + std::pow(16.0, -0.6), 1e-15);
  EXPECT_FALSE(y.provenance.trend.empty());
  const auto back = contaminate(y, t.negated());
  for (std::size_t i = 0; i < 64; ++i) EXPECT_NEAR(back.values[i], x.values[i], 1e-12);
  const auto c = contaminate(x, Trend::custom([](std::size_t s) { return 1.0 / s; }, "harmonic"));
  EXPECT_NEAR(c.values[3], x.values[3] + 0.25, 1e-15);
}

TEST(Robustness, FunctionalGap) {
  const auto x = simulate(SpectralModel::ar1(0.5), NoiseDriver(), 512, 2);
  EXPECT_EQ(functional_gap(x, Trend::zero(), Taper::tukey_hanning(), GeneratingFunction::cosine(1)), 0.0);
  EXPECT_GT(functional_gap(x, Trend::power_decay(1.0, 0.6), Taper::tukey_hanning(), GeneratingFunction::cosine(1)), 0.0);
}

TEST(Robustness, ZeroTrendReport) {
  RobustnessConfig cfg;
  cfg.trend = Trend::zero();
  cfg.T = 512;
  cfg.reps = 100;
  const auto r = robustness_report(cfg);
  EXPECT_EQ(r.ks_distance, 0.0);
  EXPECT_EQ(r.variance_ratio, 1.0);
  EXPECT_EQ(r.median_gap, 0.0);
  // serial and parallel engines agree bitwise
  cfg.trend = Trend::power_decay(1.0, 0.6);
  const auto a = robustness_report(cfg);
  cfg.parallel = false;
  const auto b = robustness_report(cfg);
  EXPECT_EQ(a.contaminated, b.contaminated);
  EXPECT_EQ(a.gaps, b.gaps);
}

TEST(Robustness, GapLadderShortAndLongMemory) {
  RobustnessConfig cfg;
  cfg.reps = 300;
  for (double beta : {0.6, 0.8}) {
    cfg.trend = Trend::power_decay(1.0, beta);
    const auto lad = gap_ladder(cfg, {512, 2048, 8192});
    EXPECT_TRUE(lad.nonincreasing) << beta;
    EXPECT_TRUE(lad.shrinking) << beta;
  }
  // long memory, with beta and the kernel decay of cos(1) well inside case (ii)
  cfg.model = SpectralModel::arfima0d0(0.2);
  cfg.trend = Trend::power_decay(1.0, 0.6);
  cfg.reps = 150;
  EXPECT_TRUE(gap_ladder(cfg, {512, 2048, 8192}).nonincreasing);
  // negative control outside beta > 1/4: gaps do not shrink
  cfg.model = SpectralModel::ar1(0.5);
  cfg.trend = Trend::power_decay_unchecked(1.0, 0.1);
  EXPECT_FALSE(gap_ladder(cfg, {512, 2048, 8192}).shrinking);
}

TEST(Robustness, WhittleTarget) {
  RobustnessConfig cfg;
  cfg.target = RobustnessTarget::whittle;
  cfg.T = 4096;
  cfg.reps = 300;
  const auto r = robustness_report(cfg);
  EXPECT_NEAR(r.variance_ratio, 1.0, 0.15);
  EXPECT_NEAR(r.asymptotic_sd * r.asymptotic_sd, 0.75 * 35.0 / 18.0, 1e-8);
  EXPECT_LT(r.median_gap, 0.2);
  EXPECT_THROW(parse_robustness_target("bayes"), ConfigError);
}
