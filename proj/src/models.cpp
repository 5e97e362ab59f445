#include "taperspec/models.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/special_functions/digamma.hpp>
#include <charconv>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "fft.hpp"
#include "taperspec/errors.hpp"
#include "taperspec/quadrature.hpp"

namespace taperspec {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kFgnTerms = 100;  // |k| <= 100 in the aliasing sum, integral tail beyond

using cd = std::complex<double>;

// 1 - sum phi_k z^k
cd ar_poly(std::span<const double> phi, cd z) {
  cd acc{1.0, 0.0}, zk{1.0, 0.0};
  for (double c : phi) {
    zk *= z;
    acc -= c * zk;
  }
  return acc;
}

// 1 + sum ma_k z^k
cd ma_poly(std::span<const double> ma, cd z) {
  cd acc{1.0, 0.0}, zk{1.0, 0.0};
  for (double c : ma) {
    zk *= z;
    acc += c * zk;
  }
  return acc;
}

// Largest modulus among inverse roots of 1 + sign * sum c_k z^k.
double max_inverse_root(std::span<const double> c, double sign) {
  const auto p = static_cast<Eigen::Index>(c.size());
  if (p == 0) return 0.0;
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index k = 0; k < p; ++k) companion(0, k) = -sign * c[static_cast<std::size_t>(k)];
  for (Eigen::Index k = 1; k < p; ++k) companion(k, k - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double two_sin_half(double lambda) { return 2.0 * std::abs(std::sin(0.5 * lambda)); }

// fGn aliasing sum S(lambda) = sum_k |lambda + 2 pi k|^{-s} without the k = 0 term,
// plus sum ln|.| |.|^{-s} for the score. The k = 0 term is handled by the callers so that
// tiny |lambda| never overflows.
struct AliasSums {
  double s0 = 0.0;
  double s1 = 0.0;
};

AliasSums fgn_alias_rest(double lambda, double s) {
  AliasSums out;
  for (int k = -kFgnTerms; k <= kFgnTerms; ++k) {
    if (k == 0) continue;
    const double y = std::abs(lambda + 2.0 * kPi * k);
    const double v = std::pow(y, -s);
    out.s0 += v;
    out.s1 += std::log(y) * v;
  }
  // Midpoint integral for |k| > K on both sides.
  for (double sgn : {1.0, -1.0}) {
    const double y0 = 2.0 * kPi * (kFgnTerms + 0.5) + sgn * lambda;
    const double a = std::pow(y0, 1.0 - s) / (s - 1.0);
    out.s0 += a / (2.0 * kPi);
    out.s1 += a * (std::log(y0) + 1.0 / (s - 1.0)) / (2.0 * kPi);
  }
  return out;
}

double fgn_constant(double hurst, double sigma2) {
  return sigma2 * std::sin(kPi * hurst) * std::tgamma(2.0 * hurst + 1.0) / (2.0 * kPi);
}

// r(0..n) of ARFIMA(0,d,0) with innovation variance v.
std::vector<double> fractional_covariances(double d, double v, std::size_t n) {
  std::vector<double> r(n + 1);
  r[0] = v * std::exp(std::lgamma(1.0 - 2.0 * d) - 2.0 * std::lgamma(1.0 - d));
  for (std::size_t k = 1; k <= n; ++k) {
    const double kk = static_cast<double>(k);
    r[k] = r[k - 1] * (kk - 1.0 + d) / (kk - d);
  }
  return r;
}

// psi weights of ma(B)/ar(B), long enough that the tail is below double precision.
std::vector<double> arma_psi(std::span<const double> ar, std::span<const double> ma) {
  const double rho = max_inverse_root(ar, -1.0);
  std::size_t n = 1 + ma.size() + ar.size();
  if (rho > 0.0) {
    n += static_cast<std::size_t>(std::ceil(std::log(1e-19) / std::log(rho))) + 32;
  }
  n = std::min<std::size_t>(n, 1u << 22);
  std::vector<double> psi(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double v = (j == 0) ? 1.0 : (j <= ma.size() ? ma[j - 1] : 0.0);
    for (std::size_t k = 1; k <= ar.size() && k <= j; ++k) v += ar[k - 1] * psi[j - k];
    psi[j] = v;
  }
  return psi;
}

// c(m) = sum_j psi_j psi_{j+m}, m = 0..n-1.
std::vector<double> psi_autocorrelation(const std::vector<double>& psi) {
  const std::size_t n = psi.size();
  const std::size_t L = detail::next_pow2(2 * n);
  std::vector<cd> buf(L);
  for (std::size_t j = 0; j < n; ++j) buf[j] = psi[j];
  detail::fft_forward(buf);
  for (auto& z : buf) z = std::norm(z);
  detail::fft_backward(buf);
  std::vector<double> c(n);
  for (std::size_t m = 0; m < n; ++m) c[m] = buf[m].real() / static_cast<double>(L);
  return c;
}

std::string fmt(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string join_list(std::span<const double> v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ':';
    out += fmt(v[i]);
  }
  return out;
}

std::size_t burn_in_for(double rho) {
  const double b = 50.0 / (1.0 - rho);
  return std::max<std::size_t>(500, static_cast<std::size_t>(std::ceil(b)));
}

// Davies-Harte: exact Gaussian sample of length n with covariances r(0..).
std::vector<double> circulant_sample(const std::function<std::vector<double>(std::size_t)>& cov,
                                     std::size_t n, Engine& engine, double& clipped) {
  const std::size_t M = detail::next_pow2(2 * n);
  const std::size_t half = M / 2;
  const auto r = cov(half);
  std::vector<cd> c(M);
  for (std::size_t j = 0; j <= half; ++j) c[j] = r[j];
  for (std::size_t j = 1; j < half; ++j) c[M - j] = r[j];
  detail::fft_forward(c);
  double neg = 0.0, total = 0.0;
  std::vector<double> lam(M);
  for (std::size_t k = 0; k < M; ++k) {
    const double v = c[k].real();
    total += std::abs(v);
    if (v < 0.0) neg += -v;
    lam[k] = std::max(v, 0.0);
  }
  clipped = total > 0.0 ? neg / total : 0.0;

  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<cd> z(M);
  const double inv = 1.0 / static_cast<double>(M);
  for (std::size_t k = 0; k < M; ++k) {
    const double a = normal(engine);
    const double b = normal(engine);
    z[k] = std::sqrt(lam[k] * inv) * cd(a, b);
  }
  detail::fft_forward(z);
  std::vector<double> out(n);
  for (std::size_t t = 0; t < n; ++t) out[t] = z[t].real();
  return out;
}

// x_t = sum phi_k x_{t-k} + y_t + sum ma_j y_{t-j}, zero presample.
std::vector<double> arma_filter(std::span<const double> ar, std::span<const double> ma,
                                std::span<const double> y) {
  std::vector<double> x(y.size());
  for (std::size_t t = 0; t < y.size(); ++t) {
    double v = y[t];
    for (std::size_t j = 1; j <= ma.size() && j <= t; ++j) v += ma[j - 1] * y[t - j];
    for (std::size_t k = 1; k <= ar.size() && k <= t; ++k) v += ar[k - 1] * x[t - k];
    x[t] = v;
  }
  return x;
}

}  // namespace

// ---------------------------------------------------------------------------

SpectralModel::SpectralModel(Family family, std::vector<double> theta, double scale,
                             std::size_t p, std::size_t q)
    : family_(family), theta_(std::move(theta)), scale_(scale), p_(p), q_(q) {
  validate();
}

void SpectralModel::validate() const {
  if (!in_domain(theta_))
    throw DomainError("parameters outside the domain of " + family_name() + ": " + spec());
  if (!(scale_ > 0.0) || !std::isfinite(scale_))
    throw DomainError("scale must be positive and finite for " + family_name());
}

SpectralModel SpectralModel::white_noise(double sigma2) {
  return SpectralModel(Family::white_noise, {sigma2}, 1.0, 0, 0);
}

SpectralModel SpectralModel::ar1(double phi, double sigma2) {
  return SpectralModel(Family::ar1, {phi}, sigma2, 1, 0);
}

SpectralModel SpectralModel::arma(std::vector<double> ar, std::vector<double> ma, double sigma2) {
  const std::size_t p = ar.size(), q = ma.size();
  std::vector<double> theta = std::move(ar);
  theta.insert(theta.end(), ma.begin(), ma.end());
  return SpectralModel(Family::arma, std::move(theta), sigma2, p, q);
}

SpectralModel SpectralModel::arfima0d0(double d, double c) {
  return SpectralModel(Family::arfima0d0, {d}, c, 0, 0);
}

SpectralModel SpectralModel::arfima(double d, std::vector<double> ar, std::vector<double> ma,
                                    double sigma2) {
  const std::size_t p = ar.size(), q = ma.size();
  std::vector<double> theta{d};
  theta.insert(theta.end(), ar.begin(), ar.end());
  theta.insert(theta.end(), ma.begin(), ma.end());
  return SpectralModel(Family::arfima_pdq, std::move(theta), sigma2, p, q);
}

SpectralModel SpectralModel::fgn(double hurst, double sigma2) {
  return SpectralModel(Family::fgn, {hurst}, sigma2, 0, 0);
}

SpectralModel SpectralModel::ornstein_uhlenbeck(double alpha, double delta, double variance) {
  if (!(alpha > 0.0) || !(delta > 0.0)) throw DomainError("OU requires alpha > 0 and delta > 0");
  const double phi = std::exp(-alpha * delta);
  return ar1(phi, variance * (1.0 - phi * phi));
}

std::string SpectralModel::family_name() const {
  switch (family_) {
    case Family::white_noise: return "white";
    case Family::ar1: return "ar1";
    case Family::arma: return "arma";
    case Family::arfima0d0: return "arfima0d0";
    case Family::arfima_pdq: return "arfima";
    case Family::fgn: return "fgn";
  }
  return "?";
}

std::vector<std::string> SpectralModel::parameter_names() const {
  std::vector<std::string> names;
  switch (family_) {
    case Family::white_noise: return {"sigma2"};
    case Family::ar1: return {"theta"};
    case Family::arfima0d0: return {"d"};
    case Family::fgn: return {"H"};
    case Family::arfima_pdq: names.push_back("d"); [[fallthrough]];
    case Family::arma:
      for (std::size_t k = 1; k <= p_; ++k) names.push_back("ar" + std::to_string(k));
      for (std::size_t k = 1; k <= q_; ++k) names.push_back("ma" + std::to_string(k));
      return names;
  }
  return names;
}

std::span<const double> SpectralModel::ar_coefficients() const {
  switch (family_) {
    case Family::ar1:
    case Family::arma: return std::span<const double>(theta_).subspan(0, p_);
    case Family::arfima_pdq: return std::span<const double>(theta_).subspan(1, p_);
    default: return {};
  }
}

std::span<const double> SpectralModel::ma_coefficients() const {
  switch (family_) {
    case Family::arma: return std::span<const double>(theta_).subspan(p_, q_);
    case Family::arfima_pdq: return std::span<const double>(theta_).subspan(1 + p_, q_);
    default: return {};
  }
}

double SpectralModel::fractional_d() const {
  if (family_ == Family::arfima0d0 || family_ == Family::arfima_pdq) return theta_[0];
  if (family_ == Family::fgn) return theta_[0] - 0.5;
  return 0.0;
}

SpectralModel SpectralModel::with_theta(std::span<const double> theta) const {
  if (theta.size() != theta_.size()) throw ShapeError("with_theta: wrong parameter count");
  return SpectralModel(family_, std::vector<double>(theta.begin(), theta.end()), scale_, p_, q_);
}

SpectralModel SpectralModel::with_scale(double scale) const {
  if (!has_scale()) throw UnsupportedError("white noise has no separate scale");
  return SpectralModel(family_, theta_, scale, p_, q_);
}

bool SpectralModel::in_domain(std::span<const double> th) const {
  if (th.size() != theta_.size()) return false;
  for (double v : th)
    if (!std::isfinite(v)) return false;
  auto arma_ok = [&](std::span<const double> ar, std::span<const double> ma) {
    return max_inverse_root(ar, -1.0) < 1.0 && max_inverse_root(ma, 1.0) < 1.0;
  };
  switch (family_) {
    case Family::white_noise: return th[0] > 0.0;
    case Family::ar1: return std::abs(th[0]) < 1.0;
    case Family::arma: return arma_ok(th.subspan(0, p_), th.subspan(p_, q_));
    case Family::arfima0d0: return th[0] > -0.5 && th[0] < 0.5;
    case Family::arfima_pdq:
      return th[0] > -0.5 && th[0] < 0.5 && arma_ok(th.subspan(1, p_), th.subspan(1 + p_, q_));
    case Family::fgn: return th[0] > 0.0 && th[0] < 1.0;
  }
  return false;
}

std::vector<double> SpectralModel::lower_bounds() const {
  std::vector<double> lo(theta_.size(), -0.99);
  switch (family_) {
    case Family::white_noise: lo[0] = 1e-6; break;
    case Family::arfima0d0:
    case Family::arfima_pdq: lo[0] = -0.49; break;
    case Family::fgn: lo[0] = 0.01; break;
    default: break;
  }
  return lo;
}

std::vector<double> SpectralModel::upper_bounds() const {
  std::vector<double> hi(theta_.size(), 0.99);
  switch (family_) {
    case Family::white_noise: hi[0] = 1e6; break;
    case Family::arfima0d0:
    case Family::arfima_pdq: hi[0] = 0.49; break;
    default: break;
  }
  return hi;
}

double SpectralModel::pole_exponent() const {
  switch (family_) {
    case Family::arfima0d0:
    case Family::arfima_pdq: return 2.0 * theta_[0];
    case Family::fgn: return 2.0 * theta_[0] - 1.0;
    default: return 0.0;
  }
}

MemoryClass SpectralModel::memory_class() const {
  const double a = pole_exponent();
  if (a > 0.0) return MemoryClass::long_memory;
  if (a < 0.0) return MemoryClass::intermediate;
  return MemoryClass::short_memory;
}

double SpectralModel::density(double lambda) const {
  const cd z = std::polar(1.0, -lambda);
  switch (family_) {
    case Family::white_noise: return theta_[0] / (2.0 * kPi);
    case Family::ar1:
    case Family::arma:
      return scale_ / (2.0 * kPi) * std::norm(ma_poly(ma_coefficients(), z)) /
             std::norm(ar_poly(ar_coefficients(), z));
    case Family::arfima0d0:
    case Family::arfima_pdq: {
      const double d = theta_[0];
      const double base = family_ == Family::arfima0d0
                              ? scale_
                              : scale_ / (2.0 * kPi) * std::norm(ma_poly(ma_coefficients(), z)) /
                                    std::norm(ar_poly(ar_coefficients(), z));
      if (lambda == 0.0) {
        if (d > 0.0) return kInf;
        if (d < 0.0) return 0.0;
        return base;
      }
      return base * std::pow(two_sin_half(lambda), -2.0 * d);
    }
    case Family::fgn: {
      const double H = theta_[0];
      const double c = fgn_constant(H, scale_);
      if (lambda == 0.0) {
        if (H > 0.5) return kInf;
        if (H < 0.5) return 0.0;
        return scale_ / (2.0 * kPi);
      }
      const double s = 2.0 * H + 1.0;
      const double a = std::abs(lambda);
      const double sq = two_sin_half(lambda);
      const double ratio = sq / a;
      return c * (ratio * ratio * std::pow(a, 1.0 - 2.0 * H) + sq * sq * fgn_alias_rest(lambda, s).s0);
    }
  }
  return 0.0;
}

double SpectralModel::log_density(double lambda) const { return std::log(density(lambda)); }

std::vector<double> SpectralModel::score(double lambda) const {
  const cd z = std::polar(1.0, -lambda);
  std::vector<double> out(theta_.size());
  auto arma_part = [&](std::size_t offset) {
    const auto ar = ar_coefficients();
    const auto ma = ma_coefficients();
    const cd a = ar_poly(ar, z), m = ma_poly(ma, z);
    cd zk{1.0, 0.0};
    for (std::size_t k = 0; k < ar.size(); ++k) {
      zk *= z;
      out[offset + k] = 2.0 * (zk / a).real();
    }
    zk = {1.0, 0.0};
    for (std::size_t k = 0; k < ma.size(); ++k) {
      zk *= z;
      out[offset + ar.size() + k] = 2.0 * (zk / m).real();
    }
  };
  switch (family_) {
    case Family::white_noise: out[0] = 1.0 / theta_[0]; break;
    case Family::ar1:
    case Family::arma: arma_part(0); break;
    case Family::arfima0d0:
    case Family::arfima_pdq:
      if (lambda == 0.0) throw PoleError("score of " + family_name() + " is singular at lambda = 0");
      out[0] = -2.0 * std::log(two_sin_half(lambda));
      if (family_ == Family::arfima_pdq) arma_part(1);
      break;
    case Family::fgn: {
      if (lambda == 0.0) throw PoleError("score of fgn is singular at lambda = 0");
      const double H = theta_[0];
      const double s = 2.0 * H + 1.0;
      // S = a^{-s}(1 + a^s R0), sum ln y y^{-s} = a^{-s}(ln a + a^s R1)
      const double a = std::abs(lambda);
      const auto rest = fgn_alias_rest(lambda, s);
      const double as = std::pow(a, s);
      const double ratio = (std::log(a) + as * rest.s1) / (1.0 + as * rest.s0);
      out[0] = kPi / std::tan(kPi * H) + 2.0 * boost::math::digamma(s) - 2.0 * ratio;
      break;
    }
  }
  return out;
}

std::vector<double> SpectralModel::covariances(std::size_t max_lag) const {
  std::vector<double> r(max_lag + 1, 0.0);
  switch (family_) {
    case Family::white_noise: r[0] = theta_[0]; break;
    case Family::ar1: {
      const double phi = theta_[0];
      r[0] = scale_ / (1.0 - phi * phi);
      for (std::size_t u = 1; u <= max_lag; ++u) r[u] = r[u - 1] * phi;
      break;
    }
    case Family::arma: {
      const auto c = psi_autocorrelation(arma_psi(ar_coefficients(), ma_coefficients()));
      for (std::size_t u = 0; u <= max_lag && u < c.size(); ++u) r[u] = scale_ * c[u];
      break;
    }
    case Family::arfima0d0: r = fractional_covariances(theta_[0], 2.0 * kPi * scale_, max_lag); break;
    case Family::arfima_pdq: {
      // X = (ma/ar)(B) Y with Y fractional: r_X(u) = sum_m c(m) r_Y(u + m), m over Z.
      const auto c = psi_autocorrelation(arma_psi(ar_coefficients(), ma_coefficients()));
      const std::size_t M = c.size();
      const auto ry = fractional_covariances(theta_[0], scale_, max_lag + M);
      auto ryv = [&](long v) { return ry[static_cast<std::size_t>(std::abs(v))]; };
      for (std::size_t u = 0; u <= max_lag; ++u) {
        const long lu = static_cast<long>(u);
        double acc = c[0] * ryv(lu);
        for (std::size_t m = 1; m < M; ++m) {
          const long lm = static_cast<long>(m);
          acc += c[m] * (ryv(lu + lm) + ryv(lu - lm));
        }
        r[u] = acc;
      }
      break;
    }
    case Family::fgn: {
      const double h2 = 2.0 * theta_[0];
      for (std::size_t u = 0; u <= max_lag; ++u) {
        const double x = static_cast<double>(u);
        r[u] = 0.5 * scale_ *
               (std::pow(x + 1.0, h2) - 2.0 * std::pow(x, h2) + std::pow(std::abs(x - 1.0), h2));
      }
      break;
    }
  }
  return r;
}

double SpectralModel::covariance(long u) const {
  const auto lag = static_cast<std::size_t>(std::abs(u));
  if (lag > 1000000) throw DomainError("covariance lag beyond 1e6");
  switch (family_) {
    case Family::white_noise: return lag == 0 ? theta_[0] : 0.0;
    case Family::ar1: {
      const double phi = theta_[0];
      return scale_ * std::pow(phi, static_cast<double>(lag)) / (1.0 - phi * phi);
    }
    case Family::fgn: {
      const double h2 = 2.0 * theta_[0];
      const double x = static_cast<double>(lag);
      return 0.5 * scale_ *
             (std::pow(x + 1.0, h2) - 2.0 * std::pow(x, h2) + std::pow(std::abs(x - 1.0), h2));
    }
    default: return covariances(lag)[lag];
  }
}

std::string SpectralModel::spec() const {
  std::ostringstream os;
  switch (family_) {
    case Family::white_noise: os << "white{sigma2=" << fmt(theta_[0]) << "}"; break;
    case Family::ar1: os << "ar1{theta=" << fmt(theta_[0]) << ",sigma2=" << fmt(scale_) << "}"; break;
    case Family::arma:
      os << "arma{ar=" << join_list(ar_coefficients()) << ",ma=" << join_list(ma_coefficients())
         << ",sigma2=" << fmt(scale_) << "}";
      break;
    case Family::arfima0d0: os << "arfima{d=" << fmt(theta_[0]) << ",c=" << fmt(scale_) << "}"; break;
    case Family::arfima_pdq:
      os << "arfima{d=" << fmt(theta_[0]) << ",ar=" << join_list(ar_coefficients())
         << ",ma=" << join_list(ma_coefficients()) << ",sigma2=" << fmt(scale_) << "}";
      break;
    case Family::fgn: os << "fgn{H=" << fmt(theta_[0]) << ",sigma2=" << fmt(scale_) << "}"; break;
  }
  return os.str();
}

// ---------------------------------------------------------------------------

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

double parse_number(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    throw ConfigError("model parameter '" + key + "': '" + text + "' is not a number");
  return v;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  if (text.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(':', start);
    out.push_back(parse_number(key, trim(std::string_view(text).substr(start, pos - start))));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

SpectralModel parse_model_spec(std::string_view text) {
  const std::string s = trim(text);
  std::string name = s;
  std::map<std::string, std::string> kv;
  if (const auto open = s.find('{'); open != std::string::npos) {
    if (s.back() != '}') throw ConfigError("model spec '" + s + "': missing closing '}'");
    name = trim(std::string_view(s).substr(0, open));
    const std::string body = s.substr(open + 1, s.size() - open - 2);
    std::size_t start = 0;
    while (start <= body.size()) {
      auto comma = body.find(',', start);
      if (comma == std::string::npos) comma = body.size();
      const std::string item = trim(std::string_view(body).substr(start, comma - start));
      if (!item.empty()) {
        const auto eq = item.find('=');
        if (eq == std::string::npos)
          throw ConfigError("model spec '" + s + "': expected name=value, got '" + item + "'");
        const std::string key = trim(std::string_view(item).substr(0, eq));
        if (!kv.emplace(key, trim(std::string_view(item).substr(eq + 1))).second)
          throw ConfigError("model spec '" + s + "': duplicate parameter '" + key + "'");
      }
      start = comma + 1;
    }
  }

  std::map<std::string, bool> used;
  auto num = [&](const std::string& key, double fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    used[key] = true;
    return parse_number(key, it->second);
  };
  auto list = [&](const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) return std::vector<double>{};
    used[key] = true;
    return parse_list(key, it->second);
  };
  auto require = [&](const std::string& key) {
    if (!kv.count(key)) throw ConfigError("model spec '" + s + "': missing parameter '" + key + "'");
    return num(key, 0.0);
  };

  auto build = [&]() -> SpectralModel {
    if (name == "white" || name == "white_noise" || name == "wn")
      return SpectralModel::white_noise(num("sigma2", 1.0));
    if (name == "ar1") return SpectralModel::ar1(num("theta", num("phi", 0.0)), num("sigma2", 1.0));
    if (name == "arma") {
      auto ar = list("ar");
      auto ma = list("ma");
      return SpectralModel::arma(std::move(ar), std::move(ma), num("sigma2", 1.0));
    }
    if (name == "arfima" || name == "arfima0d0") {
      const double d = require("d");
      auto ar = list("ar");
      auto ma = list("ma");
      if (ar.empty() && ma.empty()) {
        if (kv.count("c")) return SpectralModel::arfima0d0(d, num("c", 1.0));
        if (kv.count("sigma2")) return SpectralModel::arfima0d0(d, num("sigma2", 1.0) / (2.0 * kPi));
        return SpectralModel::arfima0d0(d);
      }
      return SpectralModel::arfima(d, std::move(ar), std::move(ma), num("sigma2", 1.0));
    }
    if (name == "fgn") return SpectralModel::fgn(require("H"), num("sigma2", 1.0));
    if (name == "ou")
      return SpectralModel::ornstein_uhlenbeck(require("alpha"), num("delta", 1.0),
                                               num("variance", 1.0));
    throw ConfigError("unknown model family '" + name + "'");
  };
  SpectralModel model = build();
  for (const auto& [key, value] : kv)
    if (!used.count(key))
      throw ConfigError("model spec '" + s + "': unknown parameter '" + key + "' for " + name);
  return model;
}

double spectral_density(const SpectralModel& model, double lambda) { return model.density(lambda); }
std::vector<double> score(const SpectralModel& model, double lambda) { return model.score(lambda); }
double covariance(const SpectralModel& model, long u) { return model.covariance(u); }

double covariance_by_quadrature(const SpectralModel& model, long u) {
  const double uu = static_cast<double>(std::abs(u));
  std::vector<double> cuts;
  // Split at zeros of cos(u lambda) so each panel sees at most half an oscillation.
  if (uu > 0) {
    const int n = static_cast<int>(std::min(uu, 256.0));
    for (int k = 1; k < n; ++k) cuts.push_back(kPi * k / n);
  }
  return quad::integrate_even(
      [&](double l) { return l == 0.0 && model.has_pole() ? 0.0 : model.density(l) * std::cos(uu * l); },
      model.has_pole(), cuts);
}

std::vector<double> ma_weights(const SpectralModel& model, std::size_t n) {
  std::vector<double> psi(n, 0.0);
  if (n == 0) return psi;
  switch (model.family()) {
    case Family::white_noise: psi[0] = 1.0; return psi;
    case Family::ar1:
    case Family::arma: {
      auto full = arma_psi(model.ar_coefficients(), model.ma_coefficients());
      for (std::size_t j = 0; j < n && j < full.size(); ++j) psi[j] = full[j];
      return psi;
    }
    case Family::arfima0d0:
    case Family::arfima_pdq: {
      const double d = model.theta()[0];
      psi[0] = 1.0;
      for (std::size_t k = 1; k < n; ++k) {
        const double kk = static_cast<double>(k);
        psi[k] = psi[k - 1] * (kk - 1.0 + d) / kk;
      }
      if (model.family() == Family::arfima0d0) return psi;
      const auto a = arma_psi(model.ar_coefficients(), model.ma_coefficients());
      std::vector<double> out(n, 0.0);
      for (std::size_t k = 0; k < n; ++k) {
        double acc = 0.0;
        for (std::size_t j = 0; j <= k && j < a.size(); ++j) acc += a[j] * psi[k - j];
        out[k] = acc;
      }
      return out;
    }
    case Family::fgn: throw UnsupportedError("fgn has no implemented MA representation");
  }
  return psi;
}

// ---------------------------------------------------------------------------

NoiseDriver NoiseDriver::from_name(std::string_view name) {
  if (name == "gaussian" || name == "normal") return NoiseDriver(DriverKind::gaussian);
  if (name == "centered_exponential" || name == "exponential" || name == "exp")
    return NoiseDriver(DriverKind::centered_exponential);
  if (name == "laplace") return NoiseDriver(DriverKind::laplace);
  throw ConfigError("unknown noise driver '" + std::string(name) +
                    "' (expected gaussian|centered_exponential|laplace)");
}

std::string NoiseDriver::name() const {
  switch (kind_) {
    case DriverKind::gaussian: return "gaussian";
    case DriverKind::centered_exponential: return "centered_exponential";
    case DriverKind::laplace: return "laplace";
  }
  return "?";
}

double NoiseDriver::kappa4() const noexcept {
  switch (kind_) {
    case DriverKind::gaussian: return 0.0;
    case DriverKind::centered_exponential: return 6.0;
    case DriverKind::laplace: return 3.0;
  }
  return 0.0;
}

void NoiseDriver::fill(Engine& engine, std::span<double> out) const {
  switch (kind_) {
    case DriverKind::gaussian: {
      std::normal_distribution<double> d(0.0, 1.0);
      for (auto& x : out) x = d(engine);
      break;
    }
    case DriverKind::centered_exponential: {
      std::exponential_distribution<double> d(1.0);
      for (auto& x : out) x = d(engine) - 1.0;
      break;
    }
    case DriverKind::laplace: {
      // difference of two Exp(1) is Laplace(0, 1); scale to unit variance
      std::exponential_distribution<double> d(1.0);
      const double b = 1.0 / std::numbers::sqrt2;
      for (auto& x : out) {
        const double e1 = d(engine);
        x = b * (e1 - d(engine));
      }
      break;
    }
  }
}

// ---------------------------------------------------------------------------

TimeSeries simulate(const SpectralModel& model, const NoiseDriver& driver, std::size_t T,
                    std::uint64_t seed) {
  if (T < 2) throw SizeError("simulate requires T >= 2");
  TimeSeries ts;
  auto& pv = ts.provenance;
  pv.model = model.spec();
  pv.driver = driver.name();
  pv.seed = seed;
  pv.length = T;
  Engine engine = make_engine(seed);

  const Family fam = model.family();
  const bool gaussian = driver.kind() == DriverKind::gaussian;
  if (fam == Family::fgn && !gaussian)
    throw UnsupportedError("fgn supports the gaussian driver only");

  switch (fam) {
    case Family::white_noise: {
      ts.values.resize(T);
      driver.fill(engine, ts.values);
      const double sd = std::sqrt(model.theta()[0]);
      for (auto& x : ts.values) x *= sd;
      pv.method = "iid";
      break;
    }
    case Family::ar1:
    case Family::arma: {
      const auto ar = model.ar_coefficients();
      const auto ma = model.ma_coefficients();
      const std::size_t burn = burn_in_for(max_inverse_root(ar, -1.0));
      std::vector<double> e(burn + T);
      driver.fill(engine, e);
      const double sd = std::sqrt(model.scale());
      for (auto& x : e) x *= sd;
      auto x = arma_filter(ar, ma, e);
      ts.values.assign(x.begin() + static_cast<std::ptrdiff_t>(burn), x.end());
      pv.method = "recursion";
      pv.burn_in = burn;
      break;
    }
    case Family::arfima0d0:
    case Family::arfima_pdq: {
      const double d = model.theta()[0];
      const auto ar = model.ar_coefficients();
      const auto ma = model.ma_coefficients();
      // innovation variance of the fractional part
      const double v = fam == Family::arfima0d0 ? 2.0 * kPi * model.scale() : model.scale();
      if (gaussian) {
        const std::size_t burn =
            fam == Family::arfima_pdq ? burn_in_for(max_inverse_root(ar, -1.0)) : 0;
        const std::size_t n = T + burn;
        auto y = circulant_sample([&](std::size_t m) { return fractional_covariances(d, v, m); }, n,
                                  engine, pv.clipped_mass);
        if (fam == Family::arfima_pdq) y = arma_filter(ar, ma, y);
        ts.values.assign(y.begin() + static_cast<std::ptrdiff_t>(burn), y.end());
        pv.method = "circulant";
        pv.burn_in = burn;
      } else {
        // Truncated MA(infinity); K from the tail-energy rule.
        const double total = model.covariance(0) / v;
        const std::size_t cap = kMaxMaTruncation;
        std::size_t K = 0;
        double partial = 0.0;
        std::vector<double> psi;
        // grow in doublings to avoid recomputing the ARMA convolution each step
        for (std::size_t n = 1024;; n = std::min(cap + 1, 2 * n)) {
          psi = ma_weights(model, n);
          partial = 0.0;
          K = n - 1;
          bool found = false;
          for (std::size_t k = 0; k < n; ++k) {
            partial += psi[k] * psi[k];
            if (total - partial < 1e-8 * total) {
              K = k;
              found = true;
              break;
            }
          }
          if (found || n == cap + 1) break;
        }
        psi.resize(K + 1);
        pv.truncation = K;
        pv.tail_fraction = std::max(0.0, (total - partial) / total);
        std::vector<double> e(T + K);
        driver.fill(engine, e);
        const std::size_t L = detail::next_pow2(T + K);
        std::vector<cd> a(L), b(L);
        for (std::size_t k = 0; k <= K; ++k) a[k] = psi[k];
        for (std::size_t t = 0; t < e.size(); ++t) b[t] = e[t];
        detail::fft_forward(a);
        detail::fft_forward(b);
        for (std::size_t k = 0; k < L; ++k) a[k] *= b[k];
        detail::fft_backward(a);
        const double sd = std::sqrt(v) / static_cast<double>(L);
        ts.values.resize(T);
        for (std::size_t t = 0; t < T; ++t) ts.values[t] = a[K + t].real() * sd;
        pv.method = "truncated_ma";
        pv.burn_in = K;
      }
      break;
    }
    case Family::fgn: {
      ts.values = circulant_sample([&](std::size_t m) { return model.covariances(m); }, T, engine,
                                   pv.clipped_mass);
      pv.method = "circulant";
      break;
    }
  }
  return ts;
}

}  // namespace taperspec
