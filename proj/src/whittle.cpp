#include "taperspec/whittle.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <charconv>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "taperspec/errors.hpp"
#include "taperspec/quadrature.hpp"

namespace taperspec {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTiny = 1e-300;
constexpr double kPenalty = 1e300;

bool fractional(const SpectralModel& m) {
  return m.family() == Family::arfima0d0 || m.family() == Family::arfima_pdq ||
         m.family() == Family::fgn;
}

double weight_at(const WeightFunction& w, double l) { return w ? w(l) : 1.0; }

// (weight * quadrature weight) and I on the grid, precomputed once per fit
struct GridData {
  std::vector<double> lambda, ww, I;
  double ww_sum = 0.0;
};

GridData grid_data(const Periodogram& p, const WeightFunction& w) {
  GridData g;
  g.lambda = p.grid.points;
  g.I = p.values;
  g.ww.resize(p.size());
  for (std::size_t j = 0; j < p.size(); ++j) {
    g.ww[j] = weight_at(w, g.lambda[j]) * p.grid.weights[j];
    g.ww_sum += g.ww[j];
  }
  return g;
}

double checked_density(const SpectralModel& m, double l) {
  const double f = m.density(l);
  if (!(f > 0.0) || !std::isfinite(f))
    throw DomainError("spectral density non-positive or non-finite on the grid at lambda = " +
                      std::to_string(l));
  return std::max(f, kTiny);
}

double objective_at(const GridData& g, const SpectralModel& m) {
  double acc = 0.0;
  for (std::size_t j = 0; j < g.lambda.size(); ++j) {
    if (g.ww[j] == 0.0) continue;
    const double f = checked_density(m, g.lambda[j]);
    acc += (std::log(f) + g.I[j] / f) * g.ww[j];
  }
  return acc / (4.0 * kPi);
}

double profiled_at(const GridData& g, const SpectralModel& unit, double* scale_out) {
  double logs = 0.0, ratio = 0.0;
  for (std::size_t j = 0; j < g.lambda.size(); ++j) {
    if (g.ww[j] == 0.0) continue;
    const double f = checked_density(unit, g.lambda[j]);
    logs += std::log(f) * g.ww[j];
    ratio += g.I[j] / f * g.ww[j];
  }
  const double s = std::max(ratio / g.ww_sum, kTiny);
  if (scale_out) *scale_out = s;
  return (logs + (std::log(s) + 1.0) * g.ww_sum) / (4.0 * kPi);
}

// optimizer view: +penalty outside the box or where the density breaks down
struct Problem {
  const GridData* data;
  const SpectralModel* family;
  std::vector<double> lo, hi;
  int evals = 0;

  double operator()(std::span<const double> theta) {
    ++evals;
    for (std::size_t k = 0; k < theta.size(); ++k)
      if (!(theta[k] >= lo[k] && theta[k] <= hi[k])) return kPenalty;
    try {
      const auto m = family->with_theta(theta).with_scale(1.0);
      return profiled_at(*data, m, nullptr);
    } catch (const Error&) {
      return kPenalty;
    }
  }
};

double nm_trampoline(const gsl_vector* v, void* params) {
  auto* pr = static_cast<Problem*>(params);
  return (*pr)(std::span<const double>(v->data, v->size));
}

struct NmResult {
  std::vector<double> x;
  double value = kPenalty;
  int iterations = 0;
  bool converged = false;
};

NmResult nelder_mead(Problem& pr, const std::vector<double>& start, const WhittleOptions& opt) {
  const std::size_t p = start.size();
  gsl_multimin_function fn{&nm_trampoline, p, &pr};
  gsl_vector* x = gsl_vector_alloc(p);
  gsl_vector* step = gsl_vector_alloc(p);
  for (std::size_t k = 0; k < p; ++k) {
    gsl_vector_set(x, k, start[k]);
    gsl_vector_set(step, k, 0.1 * (pr.hi[k] - pr.lo[k]));
  }
  gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, p);
  gsl_multimin_fminimizer_set(s, &fn, x, step);
  NmResult r;
  const int budget = pr.evals + opt.max_evals;
  while (pr.evals < budget) {
    ++r.iterations;
    if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), opt.tol) == GSL_SUCCESS) {
      r.converged = true;
      break;
    }
  }
  r.x.assign(s->x->data, s->x->data + p);
  r.value = s->fval;
  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(step);
  gsl_vector_free(x);
  return r;
}

// center first, then points halfway to alternating corners
std::vector<std::vector<double>> starts(const std::vector<double>& lo, const std::vector<double>& hi,
                                        int n) {
  const std::size_t p = lo.size();
  std::vector<std::vector<double>> out;
  for (int s = 0; s < n; ++s) {
    std::vector<double> x(p);
    for (std::size_t k = 0; k < p; ++k) {
      const double c = 0.5 * (lo[k] + hi[k]), r = 0.5 * (hi[k] - lo[k]);
      // corners (+,+), (-,-), (+,-), (-,+) on coordinate pairs
      const int corner = s == 0 ? -1 : (s - 1) % 4;
      double sign = 0.0;
      if (corner >= 0) sign = (k % 2 == 0) ? (corner == 0 || corner == 2 ? 1.0 : -1.0)
                                           : (corner == 0 || corner == 3 ? 1.0 : -1.0);
      x[k] = c + 0.5 * r * sign;
    }
    out.push_back(std::move(x));
  }
  return out;
}

}  // namespace

WeightFunction parse_weight(std::string_view spec) {
  if (spec.empty() || spec == "none") return {};
  if (spec == "cauchy") return [](double l) { return 1.0 / (1.0 + l * l); };
  if (spec.substr(0, 5) == "band:") {
    const auto num = spec.substr(5);
    double c = 0.0;
    const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), c);
    if (ec != std::errc() || ptr != num.data() + num.size() || !(c > 0.0))
      throw ConfigError("weight '" + std::string(spec) + "': band needs a positive cutoff");
    return [c](double l) { return std::abs(l) <= c ? 1.0 : 0.0; };
  }
  throw ConfigError("unknown weight '" + std::string(spec) + "' (expected none|cauchy|band:c)");
}

FrequencyGrid whittle_grid(const SpectralModel& family, std::size_t T, std::size_t oversample) {
  return canonical_grid(T, oversample, fractional(family));
}

double whittle_objective(const Periodogram& pgram, const SpectralModel& model,
                         std::span<const double> theta, const WeightFunction& w) {
  return objective_at(grid_data(pgram, w), model.with_theta(theta));
}

double profiled_whittle_objective(const Periodogram& pgram, const SpectralModel& model,
                                  std::span<const double> theta, const WeightFunction& w,
                                  double* scale_out) {
  const auto g = grid_data(pgram, w);
  if (!model.has_scale()) {
    if (scale_out) *scale_out = 1.0;
    return objective_at(g, model.with_theta(theta));
  }
  return profiled_at(g, model.with_theta(theta).with_scale(1.0), scale_out);
}

InfoMatrices info_matrices(const SpectralModel& model, std::span<const double> theta,
                           const WeightFunction& w, double kappa4, const Taper& taper,
                           bool profile_scale) {
  const auto m = model.with_theta(theta);
  const std::size_t p = m.dim();
  const bool extend = profile_scale && m.has_scale();
  const std::size_t q = extend ? p + 1 : p;
  const bool singular = fractional(m);

  // scores with an appended constant 1 for d/d ln(scale)
  auto sc = [&](double l) {
    auto s = m.score(l);
    if (extend) s.push_back(1.0);
    return s;
  };
  Eigen::MatrixXd Wf(q, q), Af(q, q);
  Eigen::VectorXd mean(q);
  for (std::size_t i = 0; i < q; ++i) {
    mean(i) = quad::integrate_even([&](double l) { return sc(l)[i] * weight_at(w, l); }, singular);
    for (std::size_t j = i; j < q; ++j) {
      Wf(i, j) = Wf(j, i) = quad::integrate_even(
          [&](double l) {
            const auto s = sc(l);
            return s[i] * s[j] * weight_at(w, l);
          },
          singular) / (4.0 * kPi);
      Af(i, j) = Af(j, i) = quad::integrate_even(
          [&](double l) {
            const auto s = sc(l);
            const double ww = weight_at(w, l);
            return s[i] * s[j] * ww * ww;
          },
          singular) / (4.0 * kPi);
    }
  }
  const Eigen::MatrixXd Bf = kappa4 / (16.0 * kPi * kPi) * mean * mean.transpose();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Wf, Eigen::EigenvaluesOnly);
  const double emax = es.eigenvalues().cwiseAbs().maxCoeff();
  if (!(es.eigenvalues().minCoeff() > 1e-12 * emax))
    throw SingularInformationError("information matrix W is singular at theta");
  const Eigen::MatrixXd Winv = Wf.inverse();
  const Eigen::MatrixXd Gf = Winv * (Af + Bf) * Winv;

  InfoMatrices out;
  const auto n = static_cast<Eigen::Index>(p);
  out.W = Wf.topLeftCorner(n, n);
  out.A = Af.topLeftCorner(n, n);
  out.B = Bf.topLeftCorner(n, n);
  out.Gamma = Gf.topLeftCorner(n, n);
  out.Gamma = 0.5 * (out.Gamma + out.Gamma.transpose()).eval();
  out.asym_cov = tapering_factor(taper) * out.Gamma;
  return out;
}

WhittleFit whittle_estimate(std::span<const double> x, const Taper& taper,
                            const SpectralModel& family, const WhittleOptions& opt) {
  const std::size_t T = x.size();
  const auto pgram = tapered_periodogram(x, taper, whittle_grid(family, T, opt.oversample));
  const auto data = grid_data(pgram, opt.weight);
  WhittleFit fit;
  fit.T = T;

  if (family.family() == Family::white_noise) {
    // f = sigma2/(2 pi): the minimizer is 2 pi times the weighted mean of I
    double acc = 0.0;
    for (std::size_t j = 0; j < data.I.size(); ++j) acc += data.I[j] * data.ww[j];
    const double s2 = 2.0 * kPi * acc / data.ww_sum;
    fit.theta_hat = {s2};
    fit.objective_value = objective_at(data, family.with_theta(fit.theta_hat));
    fit.converged = true;
  } else {
    Problem pr{&data, &family, family.lower_bounds(), family.upper_bounds()};
    const std::size_t p = family.dim();
    if (p == 1) {
      auto f1 = [&](double t) { return pr(std::span<const double>(&t, 1)); };
      std::uintmax_t iters = static_cast<std::uintmax_t>(opt.max_evals);
      const int bits = std::min(std::numeric_limits<double>::digits / 2,
                                static_cast<int>(std::ceil(-std::log2(opt.tol))) + 1);
      const auto r = boost::math::tools::brent_find_minima(f1, pr.lo[0], pr.hi[0], bits, iters);
      fit.theta_hat = {r.first};
      fit.objective_value = r.second;
      fit.iterations = static_cast<int>(iters);
      fit.converged = iters < static_cast<std::uintmax_t>(opt.max_evals) && r.second < kPenalty;
    } else {
      gsl_error_handler_t* old = gsl_set_error_handler_off();
      NmResult best;
      int total = 0;
      for (const auto& s : starts(pr.lo, pr.hi, std::max(1, opt.starts))) {
        auto r = nelder_mead(pr, s, opt);
        total += r.iterations;
        if (r.value < best.value) best = std::move(r);
      }
      gsl_set_error_handler(old);
      fit.theta_hat = best.x;
      fit.objective_value = best.value;
      fit.iterations = total;
      fit.converged = best.converged && best.value < kPenalty;
    }
    if (fit.objective_value < kPenalty)
      profiled_at(data, family.with_theta(fit.theta_hat).with_scale(1.0), &fit.scale_hat);
  }

  try {
    const auto info = info_matrices(family, fit.theta_hat, opt.weight, opt.kappa4, taper);
    fit.asym_cov = info.asym_cov;
  } catch (const Error&) {
    // boundary fits can have a singular information matrix; the point estimate stands
    const auto n = static_cast<Eigen::Index>(fit.theta_hat.size());
    fit.asym_cov = Eigen::MatrixXd::Constant(n, n, std::numeric_limits<double>::quiet_NaN());
  }
  for (Eigen::Index k = 0; k < fit.asym_cov.rows(); ++k)
    fit.se.push_back(std::sqrt(fit.asym_cov(k, k) / static_cast<double>(T)));
  return fit;
}

WhittleFit whittle_estimate(const TimeSeries& series, const Taper& taper,
                            const SpectralModel& family, const WhittleOptions& options) {
  return whittle_estimate(series.view(), taper, family, options);
}

SpectralModel fitted_model(const SpectralModel& family, const WhittleFit& fit) {
  auto m = family.with_theta(fit.theta_hat);
  return m.has_scale() ? m.with_scale(fit.scale_hat) : m;
}

}  // namespace taperspec
