#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace taperspec {

struct SampleMoments {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double skew = 0.0;
  double kurt = 0.0;      // excess
};

/// Moments in a fixed summation order.
SampleMoments sample_moments(std::span<const double> x);
double median(std::vector<double> x);
/// Distribution-free standard error of the median from the order statistics that bracket
/// a 95% interval.
double median_se(std::vector<double> x);

/// sup |F_n - F| against a continuous CDF.
double ks_statistic(std::vector<double> x, const std::function<double(double)>& cdf);
/// sup |F_n - G_m|.
double ks_two_sample(std::vector<double> a, std::vector<double> b);
/// Asymptotic Kolmogorov tail P(K > (sqrt(n_eff) + 0.12 + 0.11/sqrt(n_eff)) d).
double kolmogorov_pvalue(double d, double n_eff);

struct NormalityDiagnostics {
  double ks_stat = 0.0;
  double ks_pvalue = 0.0;
  double skew = 0.0;
  double kurt = 0.0;
};

/// KS against N(mean, var) with plug-in moments. The p-value uses the Kolmogorov law and
/// ignores the estimated moments, so it is conservative: a diagnostic, not a formal test.
/// DomainError when n < 50, DegenerateSampleError for a zero-variance sample.
NormalityDiagnostics normality_diagnostics(std::span<const double> sample);

/// KS of a sample against N(0, 1) exactly (no plug-in).
NormalityDiagnostics standard_normality(std::span<const double> sample);

}  // namespace taperspec
