#include "taperspec/quadrature.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>
#include <vector>

namespace taperspec::quad {
namespace {

double simpson_step(const Integrand& fn, double a, double fa, double b, double fb, double m,
                    double fm, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = fn(lm);
  const double frm = fn(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(fn, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson_step(fn, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

std::vector<double> cut_points(double a, double b, std::span<const double> breakpoints) {
  std::vector<double> pts{a};
  for (double x : breakpoints)
    if (x > a && x < b) pts.push_back(x);
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

}  // namespace

double adaptive_simpson(const Integrand& fn, double a, double b, double tol, int max_depth) {
  // Seed with a few panels so that integrands vanishing at the three initial nodes
  // are not mistaken for zero.
  constexpr int kPanels = 8;
  const double width = (b - a) / kPanels;
  double total = 0.0;
  for (int i = 0; i < kPanels; ++i) {
    const double lo = a + i * width;
    const double hi = (i + 1 == kPanels) ? b : lo + width;
    const double mid = 0.5 * (lo + hi);
    const double flo = fn(lo), fhi = fn(hi), fmid = fn(mid);
    const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    total += simpson_step(fn, lo, flo, hi, fhi, mid, fmid, whole, tol / kPanels, max_depth);
  }
  return total;
}

double integrate(const Integrand& fn, double a, double b, std::span<const double> breakpoints,
                 double tol) {
  const auto pts = cut_points(a, b, breakpoints);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(fn, pts[i], pts[i + 1],
                                                                           20, tol);
  }
  return total;
}

double integrate_singular_left(const Integrand& fn, double a, double b, double tol) {
  thread_local boost::math::quadrature::tanh_sinh<double> rule(12);
  // tanh_sinh passes the distance to the nearest end as a second argument; only the
  // abscissa is needed here.
  return rule.integrate([&](double x) { return fn(x); }, a, b, tol);
}

double integrate_even(const Integrand& fn, bool pole_at_zero, std::span<const double> breakpoints) {
  constexpr double pi = std::numbers::pi;
  auto pts = cut_points(0.0, pi, breakpoints);
  if (pole_at_zero && pts.size() == 2) {
    // Keep the singular rule confined to a short piece near the pole.
    pts.insert(pts.begin() + 1, 0.25);
  }
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (pole_at_zero && i == 0) {
      total += integrate_singular_left(fn, pts[0], pts[1]);
    } else {
      total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(fn, pts[i], pts[i + 1],
                                                                             20, 1e-11);
    }
  }
  return 2.0 * total;
}

}  // namespace taperspec::quad
