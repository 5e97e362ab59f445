#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "taperspec/functionals.hpp"
#include "taperspec/rng.hpp"
#include "taperspec/taper.hpp"

namespace taperspec {

/// Dense symmetric T x T matrix with entries psi^(t - s) h^a(t/T) h^a(s/T).
///
/// The taper exponent a is 1 for the tapered matrix B_T^h(psi), 0 for the plain Toeplitz
/// matrix B_T(psi), and 1/2 for the split form whose products reproduce the
/// (2 pi)^{m-1} H_m limit.
struct TaperedToeplitzMatrix {
  std::size_t order = 0;
  std::string generator;
  double taper_exponent = 1.0;
  Eigen::MatrixXd matrix;
};

inline constexpr std::size_t kToeplitzMaxT = 2048;

/// SizeError above T = 2048.
TaperedToeplitzMatrix build_matrix(const GeneratingFunction& psi, const Taper& taper,
                                   std::size_t T, double taper_exponent = 1.0);

/// (1/T) tr[A_1 ... A_m], m in {2, 3, 4}. OrderMismatchError when orders differ.
double trace_product(std::span<const TaperedToeplitzMatrix> matrices);

/// (2 pi)^{m-1} H_{2 sum a_i} int prod psi_i. `exponents` defaults to 1/2 for every factor,
/// which gives the H_m form. DivergenceError when the product is not integrable.
double trace_limit(std::span<const GeneratingFunction> psis, const Taper& taper,
                   std::span<const double> exponents = {});

/// |S(T) - M| with matrices built at the given exponents (default 1/2 each).
double trace_deviation(std::span<const GeneratingFunction> psis, const Taper& taper, std::size_t T,
                       std::span<const double> exponents = {});

/// Quadratic form Q = X' B_T^h(g) X with X ~ N(0, B_T(f)).
/// chi_k = 2^{k-1} (k-1)! tr[(B_T(f) B_T^h(g))^k]. T <= 1024.
double qf_cumulant(const SpectralModel& f, const GeneratingFunction& g, const Taper& taper,
                   std::size_t T, int k);
/// chi_1..chi_4 from one eigendecomposition.
std::vector<double> qf_cumulants(const SpectralModel& f, const GeneratingFunction& g,
                                 const Taper& taper, std::size_t T);

/// Law of Q as sum_j lambda_j xi_j^2, lambda_j the eigenvalues of B_T(f) B_T^h(g).
struct QfDistribution {
  std::vector<double> eigenvalues;  // ascending
  std::size_t rank = 0;             // eigenvalues above 1e-12 max|lambda|
  bool symmetric_path = true;       // false when the non-symmetric fallback was used

  double draw(Engine& engine) const;
  std::vector<double> sample(std::size_t n, std::uint64_t seed) const;
  /// chi_k from the eigenvalues.
  double cumulant(int k) const;
};

/// Eigenvalues via L' B^h(g) L with L the Cholesky factor of B(f); falls back to a
/// non-symmetric eigensolve (imaginary parts below 1e-8 relative) when B(f) is singular.
/// T <= 512.
QfDistribution qf_distribution(const SpectralModel& f, const GeneratingFunction& g,
                               const Taper& taper, std::size_t T);

}  // namespace taperspec
