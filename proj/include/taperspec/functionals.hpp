#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "taperspec/models.hpp"
#include "taperspec/spectrum.hpp"
#include "taperspec/taper.hpp"

namespace taperspec {

enum class GeneratingKind { zero, cosine, indicator, model_density, custom };

/// Even real function g on [-pi, pi] carried with its Fourier coefficients
/// g^(t) = int e^{i lambda t} g(lambda) d lambda.
///
///   cosine(u)      g = cos(u lambda); g^(+-u) = pi (2 pi at u = 0), else 0
///   indicator(mu)  even part of 1_[0, mu]: g = 1/2 on |lambda| <= mu, so that
///                  int f g = int_0^mu f; g^(t) = sin(mu t) / t, g^(0) = mu
///   model_density  g = f(., theta), g^(t) = r(t)
///   custom         user callable; g^ by adaptive quadrature unless supplied
class GeneratingFunction {
 public:
  static GeneratingFunction zero();
  static GeneratingFunction constant_one() { return cosine(0); }
  static GeneratingFunction cosine(long u);
  static GeneratingFunction indicator(double mu);
  static GeneratingFunction from_model(const SpectralModel& model);
  static GeneratingFunction custom(std::function<double(double)> fn, bool bounded_variation,
                                   std::string name = "custom",
                                   std::function<double(long)> fourier = {},
                                   std::vector<double> breakpoints = {});
  /// "cos:1", "ind:1.5707963", "one", "zero".
  static GeneratingFunction parse(std::string_view text);

  double operator()(double lambda) const;
  double fourier(long t) const;
  /// g^(0..n-1).
  std::vector<double> fourier_coefficients(std::size_t n) const;
  /// g on every point of `grid`.
  std::vector<double> on_grid(const FrequencyGrid& grid) const;

  GeneratingKind kind() const noexcept { return state_->kind; }
  const std::string& name() const noexcept { return state_->name; }
  bool declared_bounded_variation() const noexcept { return state_->bounded_variation; }
  /// Interior points of [0, pi] where g has jumps, kinks or sign changes worth splitting at.
  std::vector<double> breakpoints() const;
  /// Pole of g at 0 (model densities with long memory) and its exponent alpha,
  /// g ~ |lambda|^{-alpha}.
  bool has_pole() const noexcept { return state_->pole_exponent > 0.0; }
  double pole_exponent() const noexcept { return state_->pole_exponent; }
  bool is_zero() const noexcept { return state_->kind == GeneratingKind::zero; }

 private:
  struct State {
    GeneratingKind kind = GeneratingKind::zero;
    std::string name;
    bool bounded_variation = true;
    double pole_exponent = 0.0;
    long lag = 0;
    double mu = 0.0;
    std::function<double(double)> fn;
    std::function<double(long)> fourier;
    std::vector<double> breakpoints;
    std::shared_ptr<const SpectralModel> model;
  };
  explicit GeneratingFunction(std::shared_ptr<const State> s) : state_(std::move(s)) {}
  std::shared_ptr<const State> state_;
};

/// Source of the density used for plug-in variance reporting.
struct VarianceInput {
  std::optional<SpectralModel> model;  // known density; otherwise Bartlett-smoothed periodogram
  double kappa4 = 0.0;
};

struct FunctionalEstimate {
  double value = 0.0;
  double variance_hat = 0.0;  // sigma_h^2 / T
  std::size_t T = 0;
  std::string taper;
  std::string g;
  std::string variance_source;  // "model" or "bartlett" (heuristic)
};

/// J = int f g by quadrature (singular rule near a pole at 0). DivergenceError when the
/// product is not integrable.
double true_functional(const SpectralModel& model, const GeneratingFunction& g);

/// int f^2 g^2; DivergenceError for long memory with 4d >= 1 unless g vanishes at 0.
double squared_functional(const SpectralModel& model, const GeneratingFunction& g);

/// sigma_h^2(J) = 4 pi e(h) int f^2 g^2 + kappa4 e(h) (int f g)^2.
double asymptotic_variance(const SpectralModel& model, const GeneratingFunction& g,
                           const Taper& taper, double kappa4);

/// sum_j I(lambda_j) g(lambda_j) w_j.
double plugin_value(const Periodogram& pgram, std::span<const double> g_on_grid);

/// J_T^h with a plug-in variance from the known model or a Bartlett-smoothed periodogram
/// (window ceil(T^{1/3}) Fourier frequencies).
FunctionalEstimate plugin_estimate(const Periodogram& pgram, const GeneratingFunction& g,
                                   const Taper& taper, const VarianceInput& variance = {});

/// Bartlett-smoothed periodogram on the periodogram's own grid.
std::vector<double> smoothed_periodogram(const Periodogram& pgram);

/// Q_T^h = sum_t sum_s g^(t - s) h(t/T) h(s/T) X(t) X(s). SizeError above T = 2^14.
double quadratic_form(std::span<const double> x, const Taper& taper, const GeneratingFunction& g);
double quadratic_form(const TimeSeries& series, const Taper& taper, const GeneratingFunction& g);
inline constexpr std::size_t kQuadraticFormMaxT = std::size_t{1} << 14;

FunctionalEstimate covariance_estimate(const TimeSeries& series, const Taper& taper, long u,
                                       const VarianceInput& variance = {},
                                       std::size_t oversample = 4);

/// int_0^mu I(lambda) d lambda; variance 4 pi e(h) int (f g)^2 with g = 1/2 on |lambda| <= mu,
/// i.e. 2 pi e(h) int_0^mu f^2.
FunctionalEstimate spectral_function_estimate(const TimeSeries& series, const Taper& taper,
                                              double mu, const VarianceInput& variance = {},
                                              std::size_t oversample = 4);

/// Delta_{2,T}^h = int int f(l) g(l + m) F_{2,T}^h(m) dl dm - int f g, by tensor quadrature
/// on a canonical grid of n >= 2T points in each variable.
double fejer_smoothing_error(const SpectralModel& model, const GeneratingFunction& g,
                             const Taper& taper, std::size_t T);

/// Exact lag-domain value of E J_T^h for a Gaussian series:
/// sum_{|u| < T} c_h(u) r(u) g^(u) / (2 pi sum h^2), c_h(u) = sum_t h_t h_{t+u}.
double expected_plugin(const SpectralModel& model, const GeneratingFunction& g, const Taper& taper,
                       std::size_t T);

namespace kernels {
/// L(k) = sum_t y_t y_{t+k}, k = 0..max_lag; OpenMP over lags.
std::vector<double> lagged_products(std::span<const double> y, std::size_t max_lag);
/// sum_k w_k g^(k) L(k) with w_0 = 1, w_k = 2; y = h x.
double quadratic_form(std::span<const double> y, std::span<const double> ghat);
}  // namespace kernels

namespace reference {
std::vector<double> lagged_products(std::span<const double> y, std::size_t max_lag);
double quadratic_form(std::span<const double> y, std::span<const double> ghat);
/// Literal double sum over (t, s).
double quadratic_form_direct(std::span<const double> x, const Taper& taper,
                             const GeneratingFunction& g);
}  // namespace reference

}  // namespace taperspec
