#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "taperspec/rng.hpp"

namespace taperspec {

enum class Family { white_noise, ar1, arma, arfima0d0, arfima_pdq, fgn };
enum class MemoryClass { short_memory, long_memory, intermediate };

/// Parametric spectral density f(lambda, theta) on [-pi, pi].
///
/// `theta` holds the shape parameters: the coordinates of the score vector and of the
/// Whittle search. Most families also carry a multiplicative `scale` that is profiled
/// out during estimation:
///
///   white_noise  theta = (sigma2)                 f = sigma2 / (2 pi)          (no scale)
///   ar1          theta = (phi),        scale sigma2  f = sigma2/(2pi) |1 - phi e^{-il}|^{-2}
///   arma         theta = (phi.., ma..), scale sigma2  f = sigma2/(2pi) |ma(e^{-il})|^2/|ar(e^{-il})|^2
///   arfima0d0    theta = (d),          scale c       f = c |1 - e^{-il}|^{-2d}
///   arfima_pdq   theta = (d, phi.., ma..), scale sigma2  f = |1 - e^{-il}|^{-2d} f_arma
///   fgn          theta = (H),          scale sigma2  f = c_H |1 - e^{-il}|^2 sum_k |l + 2 pi k|^{-2H-1}
///
/// AR polynomial 1 - phi_1 z - ... - phi_p z^p, MA polynomial 1 + ma_1 z + ... + ma_q z^q.
/// For arfima0d0 the innovation variance is 2 pi c; for fgn, c_H is fixed so that the
/// variance r(0) equals sigma2.
class SpectralModel {
 public:
  static SpectralModel white_noise(double sigma2 = 1.0);
  static SpectralModel ar1(double phi, double sigma2 = 1.0);
  static SpectralModel arma(std::vector<double> ar, std::vector<double> ma, double sigma2 = 1.0);
  static SpectralModel arfima0d0(double d, double c = 1.0);
  static SpectralModel arfima(double d, std::vector<double> ar, std::vector<double> ma,
                              double sigma2 = 1.0);
  static SpectralModel fgn(double hurst, double sigma2 = 1.0);
  /// Exact sampling of an Ornstein-Uhlenbeck process with covariance s2 e^{-alpha|t|} at
  /// spacing delta: an AR(1) with phi = e^{-alpha delta} and matching variance.
  static SpectralModel ornstein_uhlenbeck(double alpha, double delta, double variance = 1.0);

  Family family() const noexcept { return family_; }
  std::string family_name() const;
  std::size_t ar_order() const noexcept { return p_; }
  std::size_t ma_order() const noexcept { return q_; }

  std::span<const double> theta() const noexcept { return theta_; }
  std::size_t dim() const noexcept { return theta_.size(); }
  bool has_scale() const noexcept { return family_ != Family::white_noise; }
  double scale() const noexcept { return scale_; }
  std::vector<std::string> parameter_names() const;

  /// Copy with new shape parameters; DomainError outside Theta.
  SpectralModel with_theta(std::span<const double> theta) const;
  SpectralModel with_scale(double scale) const;

  bool in_domain(std::span<const double> theta) const;
  /// Compact estimation box Theta.
  std::vector<double> lower_bounds() const;
  std::vector<double> upper_bounds() const;

  MemoryClass memory_class() const;
  /// alpha with f(lambda) ~ |lambda|^{-alpha} as lambda -> 0 (0 for short memory,
  /// negative when f vanishes at the origin).
  double pole_exponent() const;
  bool has_pole() const { return pole_exponent() > 0.0; }

  /// f(lambda); +infinity at a pole.
  double density(double lambda) const;
  double log_density(double lambda) const;
  /// d/dtheta_k ln f(lambda, theta), k = 1..dim(). PoleError at a spectral pole.
  std::vector<double> score(double lambda) const;
  /// r(u) = int e^{i lambda u} f(lambda) d lambda from closed forms or exact series.
  double covariance(long u) const;
  /// r(0..max_lag).
  std::vector<double> covariances(std::size_t max_lag) const;

  /// Canonical text form, e.g. "ar1{theta=0.5,sigma2=1}".
  std::string spec() const;

  std::span<const double> ar_coefficients() const;
  std::span<const double> ma_coefficients() const;
  double fractional_d() const;

 private:
  SpectralModel(Family family, std::vector<double> theta, double scale, std::size_t p,
                std::size_t q);
  void validate() const;

  Family family_;
  std::vector<double> theta_;
  double scale_;
  std::size_t p_ = 0;
  std::size_t q_ = 0;
};

/// Parse "family{name=value,...}". Families: white, ar1, arma, arfima, arfima0d0, fgn, ou.
/// List-valued parameters (arma/arfima `ar`, `ma`) separate entries with ':'.
SpectralModel parse_model_spec(std::string_view text);

double spectral_density(const SpectralModel& model, double lambda);
std::vector<double> score(const SpectralModel& model, double lambda);
double covariance(const SpectralModel& model, long u);
/// Independent route: quadrature of e^{i lambda u} f(lambda) over [-pi, pi].
double covariance_by_quadrature(const SpectralModel& model, long u);

/// MA(infinity) weights psi_0..psi_{n-1} of the model's linear representation with unit
/// innovations (fractional part via psi_k = psi_{k-1} (k - 1 + d) / k).
std::vector<double> ma_weights(const SpectralModel& model, std::size_t n);

enum class DriverKind { gaussian, centered_exponential, laplace };

/// Unit-variance, zero-mean innovation law with a known fourth cumulant.
class NoiseDriver {
 public:
  explicit NoiseDriver(DriverKind kind = DriverKind::gaussian) : kind_(kind) {}
  static NoiseDriver from_name(std::string_view name);

  DriverKind kind() const noexcept { return kind_; }
  std::string name() const;
  /// 0 (gaussian), 6 (Exp(1) - 1), 3 (Laplace(0, 1/sqrt 2)).
  double kappa4() const noexcept;

  void fill(Engine& engine, std::span<double> out) const;

 private:
  DriverKind kind_;
};

struct Provenance {
  std::string model;
  std::string driver;
  std::uint64_t seed = 0;
  std::size_t length = 0;
  std::string method;
  std::size_t burn_in = 0;
  std::size_t truncation = 0;     // MA truncation lag K, 0 when unused
  double tail_fraction = 0.0;     // discarded share of sum psi_k^2
  double clipped_mass = 0.0;      // negative circulant eigenvalue mass set to zero
  std::string trend;              // set when the series was contaminated
};

struct TimeSeries {
  std::vector<double> values;
  Provenance provenance;

  std::size_t size() const noexcept { return values.size(); }
  std::span<const double> view() const noexcept { return values; }
};

/// Realization X(1..T) of the model driven by `driver`, deterministic in (model, driver,
/// T, seed). Short-memory families use the innovations recursion with burn-in; Gaussian
/// long-memory families use circulant embedding of the exact covariance; non-Gaussian
/// long-memory families use a truncated MA(infinity) filter.
TimeSeries simulate(const SpectralModel& model, const NoiseDriver& driver, std::size_t T,
                    std::uint64_t seed);

/// Maximum MA truncation lag used for non-Gaussian fractional simulation.
inline constexpr std::size_t kMaxMaTruncation = std::size_t{1} << 20;

}  // namespace taperspec
