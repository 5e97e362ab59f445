#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "taperspec/models.hpp"
#include "taperspec/spectrum.hpp"
#include "taperspec/taper.hpp"
#include "taperspec/whittle.hpp"

namespace taperspec {

/// phi_1..phi_m on [-pi, pi] with the Gram matrix int phi_k phi_j computed by quadrature.
/// Functions that vanish identically are allowed; they are excluded from the residual.
struct TestBasis {
  std::string name;
  std::vector<std::function<double(double)>> phi;
  std::vector<bool> vanishing;
  Eigen::MatrixXd gram;
  double gram_residual = 0.0;  // max |G - I| over the non-vanishing block

  std::size_t size() const noexcept { return phi.size(); }
  std::vector<double> on_grid(std::size_t j, const FrequencyGrid& grid) const;

  /// cos(j lambda)/sqrt(pi), j = 1..m.
  static TestBasis cosine(std::size_t m);
  /// Score-orthogonal basis for a pure AR(p) model: phi_j = 0 for j <= p and
  /// phi_j = c Re[e^{ij l} a(e^{-il}) / a(e^{il})] otherwise, c fixed numerically.
  /// UnsupportedError for families with an MA part or a fractional part.
  static TestBasis ar_example(const SpectralModel& ar_model, std::size_t m);
  /// Even functions supplied by the caller; the Gram matrix is computed here.
  static TestBasis custom(std::vector<std::function<double(double)>> phi, std::string name = "custom");
};

/// A basis that may depend on the fitted model (the AR example does).
using BasisBuilder = std::function<TestBasis(const SpectralModel&)>;

/// "cosine:m", "ar-example:m" or "ar-example" (m = p + 3). ConfigError otherwise.
BasisBuilder parse_basis(std::string_view spec);

/// Sum_j nu_j xi_j^2 with iid standard normal xi.
struct MixtureLaw {
  std::vector<double> weights;

  /// Exact chi-square tail when every weight is 0 or 1 (to 1e-9), else seeded Monte Carlo.
  double upper_tail(double s, std::size_t draws = 200000, std::uint64_t seed = kMixtureSeed) const;
  double quantile(double p, std::size_t draws = 200000, std::uint64_t seed = kMixtureSeed) const;
  std::vector<double> sample(std::size_t n, std::uint64_t seed) const;
  bool is_chi_square(std::size_t* dof = nullptr) const;

  static constexpr std::uint64_t kMixtureSeed = 0x6f6f665f6d697846ULL;
};

struct GofResult {
  double statistic = 0.0;
  std::vector<double> phi;
  std::size_t dof = 0;                // chi-square degrees of freedom (simple test, or degenerate mixture)
  std::vector<double> mixture;        // weights of the limit law
  std::vector<double> nu;             // clamped roots of det[(1 - nu) Gamma - e B'B] (composite)
  std::size_t clamped = 0;            // roots moved into [0, 1]
  double p_value = 1.0;
  double mc_half_width = 0.0;         // 95% half-width of a Monte Carlo p-value, 0 when exact
  double alpha = 0.05;
  bool reject = false;
  std::vector<double> theta_hat;      // composite only
};

/// Phi_j = sqrt(T) / sqrt(4 pi e) sum_grid [I/f0 - 1] phi_j w with an explicit factor e.
std::vector<double> phi_vector(const Periodogram& pgram, const SpectralModel& f0,
                               const TestBasis& basis, double e);
/// Same with the periodogram computed here and e = e(h).
std::vector<double> phi_vector(std::span<const double> x, const Taper& taper,
                               const SpectralModel& f0, const TestBasis& basis);

/// S = |Phi|^2 against chi^2_m.
GofResult simple_test(std::span<const double> x, const Taper& taper, const SpectralModel& f0,
                      const TestBasis& basis, double alpha = 0.05);

/// (1/4pi) int d_k ln f d_j ln f.
Eigen::MatrixXd gamma_matrix(const SpectralModel& family, std::span<const double> theta);
/// b_jk = (4 pi e)^{-1/2} int phi_j d_k ln f, e = e(h) unless given explicitly.
Eigen::MatrixXd b_matrix(const SpectralModel& family, std::span<const double> theta,
                         const TestBasis& basis, const Taper& taper);
Eigen::MatrixXd b_matrix(const SpectralModel& family, std::span<const double> theta,
                         const TestBasis& basis, double e);

/// Delta_k = sqrt(T) / sqrt(4 pi e) sum_grid [I/f - 1] d_k ln f w.
std::vector<double> delta_vector(const Periodogram& pgram, const SpectralModel& model, double e);
std::vector<double> delta_vector(std::span<const double> x, const Taper& taper,
                                 const SpectralModel& family, std::span<const double> theta);

struct MixtureWeights {
  std::vector<double> nu;
  std::size_t clamped = 0;
};

/// nu_k = 1 - e mu_k with mu_k the eigenvalues of Gamma^-1 B'B, clamped to [0, 1].
/// `e_factor` = 1 gives the bare determinant equation det[(1 - nu) Gamma - B'B] = 0.
/// SingularInformationError when Gamma is singular.
MixtureWeights mixture_weights(const Eigen::MatrixXd& Gamma, const Eigen::MatrixXd& B,
                               double e_factor = 1.0);

/// Covariance of the limit of Phi(theta_hat): G - e B Gamma^-1 B' = G - (1/4pi) C Gamma^-1 C'
/// with C_jk = int phi_j d_k ln f, so e(h) cancels. The scale of the family (when present)
/// is treated as an extra estimated parameter.
Eigen::MatrixXd composite_covariance(const SpectralModel& model, const TestBasis& basis);

struct CompositeOptions {
  WhittleOptions whittle;
  std::size_t mixture_draws = 200000;
  std::uint64_t mixture_seed = MixtureLaw::kMixtureSeed;
};

/// S at the tapered Whittle estimate; the limit law is the weighted chi-square mixture
/// given by the eigenvalues of composite_covariance. Aborts when the
/// estimator does not converge (ConvergenceError).
GofResult composite_test(std::span<const double> x, const Taper& taper, const SpectralModel& family,
                         const BasisBuilder& basis, double alpha = 0.05,
                         const CompositeOptions& options = {});

}  // namespace taperspec
