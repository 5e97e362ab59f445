#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "taperspec/functionals.hpp"
#include "taperspec/models.hpp"
#include "taperspec/taper.hpp"

namespace taperspec {

enum class TrendKind { zero, power_decay, custom };

/// Deterministic trend M(t), t = 1, 2, ...
class Trend {
 public:
  static Trend zero();
  /// M(t) = c t^{-beta}. DomainError unless beta > 1/4.
  static Trend power_decay(double c, double beta);
  /// Same formula without the beta > 1/4 check, for negative controls.
  static Trend power_decay_unchecked(double c, double beta);
  static Trend custom(std::function<double(std::size_t)> fn, std::string name = "custom");
  /// "zero" | "power:c,beta" | "power-unchecked:c,beta". ConfigError otherwise.
  static Trend parse(std::string_view spec);

  TrendKind kind() const noexcept { return kind_; }
  double c() const noexcept { return c_; }
  double beta() const noexcept { return beta_; }
  /// beta > 1/4 (always true for zero, false for custom).
  bool in_theorem_range() const noexcept;
  std::string spec() const;
  Trend negated() const;

  double operator()(std::size_t t) const;

 private:
  TrendKind kind_ = TrendKind::zero;
  double c_ = 0.0;
  double beta_ = 0.0;
  double sign_ = 1.0;
  std::function<double(std::size_t)> fn_;
  std::string name_ = "zero";
};

/// Y(t) = X(t) + M(t); the provenance records the trend.
TimeSeries contaminate(const TimeSeries& series, const Trend& trend);

/// sqrt(T) |J(I_Y) - J(I_X)| on the canonical grid (oversample 2).
double functional_gap(const TimeSeries& series, const Trend& trend, const Taper& taper,
                      const GeneratingFunction& g);

enum class RobustnessTarget { functional, whittle };
RobustnessTarget parse_robustness_target(std::string_view name);

struct RobustnessConfig {
  SpectralModel model = SpectralModel::ar1(0.5);
  NoiseDriver driver;
  Taper taper = Taper::tukey_hanning();
  Trend trend = Trend::power_decay(1.0, 0.6);
  RobustnessTarget target = RobustnessTarget::functional;
  GeneratingFunction g = GeneratingFunction::cosine(1);
  std::size_t T = 2048;
  std::size_t reps = 500;
  std::uint64_t seed = 1;
  bool parallel = true;
};

/// Paired Monte Carlo on X and Y = X + M built from the same innovations.
/// `clean` / `contaminated` hold sqrt(T)(estimate - truth); for the Whittle target this is
/// the first coordinate of theta. `*_std` divide by the asymptotic standard deviation.
struct RobustnessReport {
  std::size_t T = 0;
  std::size_t reps = 0;
  double truth = 0.0;
  double asymptotic_sd = 0.0;
  std::vector<double> clean, contaminated, gaps;
  double bias_clean = 0.0, bias_contaminated = 0.0;
  double var_clean = 0.0, var_contaminated = 0.0;
  double variance_ratio = 0.0;   // var_contaminated / var_clean
  double ks_distance = 0.0;      // two-sample KS between the standardized samples
  double ks_pvalue_clean = 0.0;  // normality diagnostics of the standardized samples vs N(0,1)
  double ks_pvalue_contaminated = 0.0;
  double median_gap = 0.0;
  double median_gap_se = 0.0;
};

RobustnessReport robustness_report(const RobustnessConfig& config);

struct GapLadder {
  std::vector<std::size_t> T;
  std::vector<double> median, se;
  /// median(T_{k+1}) <= median(T_k) + se(T_k) for every step
  bool nonincreasing = false;
  /// last median below half the first: the negative control checks this is false
  bool shrinking = false;
};

GapLadder gap_ladder(RobustnessConfig config, const std::vector<std::size_t>& Ts);
/// Ladder summary of reports already computed at increasing T.
GapLadder ladder_from_reports(const std::vector<RobustnessReport>& reports);

}  // namespace taperspec
