#include "taperspec/stats.hpp"

#include <algorithm>
#include <cmath>

#include "taperspec/errors.hpp"

namespace taperspec {
namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

NormalityDiagnostics diagnose(std::span<const double> x, double mu, double sd) {
  const auto m = sample_moments(x);
  NormalityDiagnostics d;
  d.ks_stat = ks_statistic({x.begin(), x.end()}, [&](double v) { return normal_cdf((v - mu) / sd); });
  d.ks_pvalue = kolmogorov_pvalue(d.ks_stat, static_cast<double>(x.size()));
  d.skew = m.skew;
  d.kurt = m.kurt;
  return d;
}

}  // namespace

SampleMoments sample_moments(std::span<const double> x) {
  SampleMoments m;
  const double n = static_cast<double>(x.size());
  if (x.empty()) return m;
  for (double v : x) m.mean += v;
  m.mean /= n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double c = v - m.mean;
    m2 += c * c;
    m3 += c * c * c;
    m4 += c * c * c * c;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  m.variance = x.size() > 1 ? m2 * n / (n - 1.0) : 0.0;
  if (m2 > 0.0) {
    m.skew = m3 / std::pow(m2, 1.5);
    m.kurt = m4 / (m2 * m2) - 3.0;
  }
  return m;
}

double median(std::vector<double> x) {
  if (x.empty()) throw DomainError("median of an empty sample");
  std::sort(x.begin(), x.end());
  const std::size_t n = x.size();
  return n % 2 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

double median_se(std::vector<double> x) {
  const std::size_t n = x.size();
  if (n < 4) throw DomainError("median_se needs at least 4 points");
  std::sort(x.begin(), x.end());
  const double half = 1.96 * std::sqrt(static_cast<double>(n)) / 2.0;
  const auto lo = static_cast<std::size_t>(std::max(0.0, std::floor(n / 2.0 - half)));
  const auto hi = static_cast<std::size_t>(std::min(n - 1.0, std::ceil(n / 2.0 + half)));
  return (x[hi] - x[lo]) / (2.0 * 1.96);
}

double ks_statistic(std::vector<double> x, const std::function<double(double)>& cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double F = cdf(x[i]);
    d = std::max({d, F - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - F});
  }
  return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double kolmogorov_pvalue(double d, double n_eff) {
  const double s = std::sqrt(n_eff);
  const double lam = (s + 0.12 + 0.11 / s) * d;
  if (lam < 0.2) return 1.0;
  double sum = 0.0, sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = sign * std::exp(-2.0 * k * k * lam * lam);
    sum += term;
    if (std::abs(term) < 1e-16 * std::abs(sum)) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

NormalityDiagnostics normality_diagnostics(std::span<const double> sample) {
  if (sample.size() < 50) throw DomainError("normality_diagnostics needs n >= 50");
  const auto m = sample_moments(sample);
  if (!(m.variance > 0.0)) throw DegenerateSampleError("sample has zero variance");
  return diagnose(sample, m.mean, std::sqrt(m.variance));
}

NormalityDiagnostics standard_normality(std::span<const double> sample) {
  if (sample.size() < 50) throw DomainError("standard_normality needs n >= 50");
  return diagnose(sample, 0.0, 1.0);
}

}  // namespace taperspec
