#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "taperspec/models.hpp"
#include "taperspec/spectrum.hpp"
#include "taperspec/taper.hpp"

namespace taperspec {

/// Even, nonnegative weight w(lambda). An empty function means w = 1.
using WeightFunction = std::function<double(double)>;

/// "none" | "cauchy" (1 / (1 + lambda^2)) | "band:c" (1 on |lambda| <= c). ConfigError otherwise.
WeightFunction parse_weight(std::string_view spec);

struct InfoMatrices {
  Eigen::MatrixXd W;      // (1/4pi) int d_i ln f d_j ln f w
  Eigen::MatrixXd A;      // same with w^2
  Eigen::MatrixXd B;      // kappa4/(16 pi^2) int d_i ln f w int d_j ln f w
  Eigen::MatrixXd Gamma;  // W^-1 (A + B) W^-1
  Eigen::MatrixXd asym_cov;  // e(h) Gamma
};

/// Information matrices at `theta` of the model's family.
///
/// With `profile_scale` set and a family carrying a multiplicative scale, Gamma is the
/// shape block of the joint (theta, ln scale) problem, i.e. the covariance of the
/// estimator whose scale is profiled out. For ARMA and fractional families the scores
/// integrate to zero and this changes nothing; for fgn it removes the scale-shape
/// correlation. W, A and B are always the plain p x p matrices.
/// SingularInformationError when W is singular.
InfoMatrices info_matrices(const SpectralModel& model, std::span<const double> theta,
                           const WeightFunction& w = {}, double kappa4 = 0.0,
                           const Taper& taper = Taper::rectangular(), bool profile_scale = true);

/// (1/4pi) sum_j [ln f(l_j) + I(l_j)/f(l_j)] w(l_j) w_j at the model's own scale.
/// DomainError when f is non-positive or non-finite on the grid.
double whittle_objective(const Periodogram& pgram, const SpectralModel& model,
                         std::span<const double> theta, const WeightFunction& w = {});

/// Objective with the scale minimized in closed form; `scale_out` receives it.
double profiled_whittle_objective(const Periodogram& pgram, const SpectralModel& model,
                                  std::span<const double> theta, const WeightFunction& w = {},
                                  double* scale_out = nullptr);

struct WhittleOptions {
  std::size_t oversample = 2;
  double tol = 1e-7;
  int max_evals = 2000;
  int starts = 5;  // Nelder-Mead multi-starts for p >= 2
  WeightFunction weight;
  double kappa4 = 0.0;  // only enters asym_cov
};

struct WhittleFit {
  std::vector<double> theta_hat;
  double scale_hat = 1.0;
  double objective_value = 0.0;
  int iterations = 0;
  bool converged = false;
  Eigen::MatrixXd asym_cov;  // e(h) Gamma(theta_hat), covariance of sqrt(T)(theta_hat - theta)
  std::vector<double> se;    // sqrt(diag(asym_cov) / T)
  std::size_t T = 0;
};

/// Tapered Whittle estimate over the family's box. Brent for one shape parameter,
/// Nelder-Mead from several deterministic starts otherwise; white noise is closed form.
/// Long-memory families use the shifted grid so lambda = 0 is never evaluated.
WhittleFit whittle_estimate(std::span<const double> x, const Taper& taper,
                            const SpectralModel& family, const WhittleOptions& options = {});
WhittleFit whittle_estimate(const TimeSeries& series, const Taper& taper,
                            const SpectralModel& family, const WhittleOptions& options = {});

/// The family evaluated at the fitted parameters and scale.
SpectralModel fitted_model(const SpectralModel& family, const WhittleFit& fit);

/// Grid used by whittle_estimate for this family.
FrequencyGrid whittle_grid(const SpectralModel& family, std::size_t T, std::size_t oversample = 2);

}  // namespace taperspec
