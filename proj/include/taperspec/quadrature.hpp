#pragma once

#include <functional>
#include <span>

namespace taperspec::quad {

using Integrand = std::function<double(double)>;

/// Adaptive Simpson on [a, b] to absolute tolerance `tol`.
double adaptive_simpson(const Integrand& fn, double a, double b, double tol = 1e-12,
                        int max_depth = 48);

/// Integral over [a, b] of a smooth integrand (adaptive Gauss-Kronrod), optionally
/// split at interior breakpoints where the integrand has kinks or jumps.
double integrate(const Integrand& fn, double a, double b,
                 std::span<const double> breakpoints = {}, double tol = 1e-11);

/// Integral over [a, b] of an integrand with an integrable singularity at `a`.
/// Double-exponential (tanh-sinh) nodes cluster at the singular end.
double integrate_singular_left(const Integrand& fn, double a, double b, double tol = 1e-10);

/// Integral over [-pi, pi] of an even integrand, computed as 2 * int_0^pi.
/// `pole_at_zero` switches the piece adjacent to 0 to the singular rule.
double integrate_even(const Integrand& fn, bool pole_at_zero = false,
                      std::span<const double> breakpoints = {});

}  // namespace taperspec::quad
