#include "experiments.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <cstdlib>
#include <numbers>

#include "taperspec/errors.hpp"
#include "taperspec/functionals.hpp"
#include "taperspec/gof.hpp"
#include "taperspec/models.hpp"
#include "taperspec/replicate.hpp"
#include "taperspec/robustness.hpp"
#include "taperspec/spectrum.hpp"
#include "taperspec/stats.hpp"
#include "taperspec/taper.hpp"
#include "taperspec/toeplitz.hpp"
#include "taperspec/whittle.hpp"

namespace taperspec::detail {
namespace {

constexpr double kPi = std::numbers::pi;

template <class F>
auto replicate(const ExperimentConfig& c, std::size_t reps, std::uint64_t seed, F&& fn) {
  return c.serial ? reference::replicate(reps, seed, fn) : kernels::replicate(reps, seed, fn);
}

ReportRow row(const ExperimentConfig& c, const std::string& taper, std::size_t T,
              std::optional<std::size_t> rep = std::nullopt) {
  ReportRow r;
  r.experiment = c.id;
  r.taper = taper;
  r.T = T;
  r.rep = rep;
  return r;
}

// Sample variance and its standard error from the fourth central moment.
struct VarianceEstimate {
  double mean = 0.0, var = 0.0, se = 0.0;
};

VarianceEstimate variance_with_se(const std::vector<double>& y) {
  const double n = static_cast<double>(y.size());
  VarianceEstimate v;
  for (double a : y) v.mean += a;
  v.mean /= n;
  double m2 = 0.0, m4 = 0.0;
  for (double a : y) {
    const double d = (a - v.mean) * (a - v.mean);
    m2 += d;
    m4 += d * d;
  }
  m2 /= n;
  m4 /= n;
  v.var = n > 1 ? m2 * n / (n - 1.0) : 0.0;
  v.se = n > 3 ? std::sqrt(std::max(0.0, (m4 - m2 * m2 * (n - 3.0) / (n - 1.0)) / n)) : NAN;
  return v;
}

double rate_se(double p, std::size_t n) { return std::sqrt(p * (1.0 - p) / static_cast<double>(n)); }

double ks_vs_chi_square(const std::vector<double>& s, std::size_t dof) {
  const boost::math::chi_squared law(static_cast<double>(dof));
  return ks_statistic(s, [&](double v) { return v <= 0.0 ? 0.0 : boost::math::cdf(law, v); });
}

std::vector<std::string> param_names(const SpectralModel& m) {
  auto n = m.parameter_names();
  n.resize(m.dim());
  return n;
}

}  // namespace

const std::vector<KindSchema>& kind_schemas() {
  static const std::vector<KindSchema> s = {
      {ExperimentKind::simulate, {}, {}},
      {ExperimentKind::periodogram, {"oversample", "shifted"}, {}},
      {ExperimentKind::estimate_functional,
       {"g", "oversample"},
       {"ratio", "ratio_error", "gauss_separation", "ks_pvalue", "plugin_ks_pvalue"}},
      {ExperimentKind::whittle,
       {"weight", "oversample"},
       {"var_ratio", "var_over_gamma", "converged", "within_005"}},
      {ExperimentKind::gof,
       {"mode", "basis", "alpha", "alternative", "mixture_draws"},
       {"size", "power", "power_excess", "ks_distance"}},
      {ExperimentKind::trace_experiment,
       {"pair", "g", "exponents"},
       {"decreasing_steps", "final_delta", "limit_error", "min_delta"}},
      {ExperimentKind::fejer,
       {"delta", "g", "delta2_T"},
       {"normalization_error", "tail_decreasing", "sqrtT_delta2"}},
      {ExperimentKind::robustness,
       {"trend", "target", "g"},
       {"gap_nonincreasing", "gap_shrinking", "variance_ratio", "asymptotic_ratio", "ks_distance"}},
      {ExperimentKind::qf_distribution, {"g"}, {"cumulant_z", "ks_distance"}},
  };
  return s;
}

const KindSchema& schema_for(ExperimentKind kind) {
  for (const auto& s : kind_schemas())
    if (s.kind == kind) return s;
  throw ConfigError("no schema for experiment kind");
}

void run_simulate(const ExperimentConfig& c, RunReport& out) {
  const auto model = parse_model_spec(c.model);
  const auto driver = NoiseDriver::from_name(c.driver);
  for (std::size_t T : c.T) {
    const auto series = replicate(c, c.reps, c.seed,
                                  [&](std::size_t, std::uint64_t s) { return simulate(model, driver, T, s); });
    std::vector<double> all;
    for (std::size_t r = 0; r < c.reps; ++r)
      for (std::size_t t = 0; t < T; ++t) {
        auto x = row(c, "", T, r);
        x.metrics = {{"t", static_cast<double>(t + 1)}, {"x", series[r].values[t]}};
        out.rows.push_back(std::move(x));
        all.push_back(series[r].values[t]);
      }
    const auto m = sample_moments(all);
    auto a = row(c, "", T);
    a.metrics = {{"R", static_cast<double>(c.reps)},
                 {"mean", m.mean},
                 {"variance", m.variance},
                 {"r0", model.covariance(0)},
                 {"clipped_mass", series[0].provenance.clipped_mass},
                 {"tail_fraction", series[0].provenance.tail_fraction}};
    out.aggregates.push_back(a);
    out.notes.push_back("T=" + std::to_string(T) + " method " + series[0].provenance.method);
  }
}

void run_periodogram(const ExperimentConfig& c, RunReport& out) {
  const auto model = parse_model_spec(c.model);
  const auto driver = NoiseDriver::from_name(c.driver);
  const auto os = c.option_size("oversample", 1);
  const bool shifted = c.option("shifted", "false") == "true";
  for (const auto& tn : c.tapers) {
    const auto h = Taper::from_name(tn);
    for (std::size_t T : c.T) {
      const auto grid = canonical_grid(T, os, shifted);
      const auto pg = replicate(c, c.reps, c.seed, [&](std::size_t, std::uint64_t s) {
        return tapered_periodogram(simulate(model, driver, T, s), h, grid);
      });
      double level = 0.0, truth = 0.0;
      for (std::size_t r = 0; r < c.reps; ++r)
        for (std::size_t j = 0; j < grid.size(); ++j) {
          auto x = row(c, tn, T, r);
          x.metrics = {{"lambda", grid.points[j]}, {"value", pg[r].values[j]}};
          out.rows.push_back(std::move(x));
          level += pg[r].values[j] * grid.weights[j];
        }
      for (std::size_t j = 0; j < grid.size(); ++j) truth += model.density(grid.points[j]) * grid.weights[j];
      auto a = row(c, tn, T);
      a.metrics = {{"R", static_cast<double>(c.reps)},
                   {"points", static_cast<double>(grid.size())},
                   {"c_T", pg[0].c_T},
                   {"mean_integral", level / static_cast<double>(c.reps)},
                   {"model_integral", truth}};
      out.aggregates.push_back(a);
    }
  }
}

void run_estimate_functional(const ExperimentConfig& c, RunReport& out) {
  const auto model = parse_model_spec(c.model);
  const auto driver = NoiseDriver::from_name(c.driver);
  const auto g = GeneratingFunction::parse(c.option("g", "cos:1"));
  const auto os = c.option_size("oversample", 2);
  const double truth = true_functional(model, g);
  for (const auto& tn : c.tapers) {
    const auto h = Taper::from_name(tn);
    const double s2 = asymptotic_variance(model, g, h, driver.kappa4());
    const double s2_gauss = asymptotic_variance(model, g, h, 0.0);
    for (std::size_t T : c.T) {
      const auto grid = canonical_grid(T, os);
      const auto gv = g.on_grid(grid);
      const double sqT = std::sqrt(static_cast<double>(T));
      const auto J = replicate(c, c.reps, c.seed, [&](std::size_t, std::uint64_t s) {
        return plugin_value(tapered_periodogram(simulate(model, driver, T, s), h, grid), gv);
      });
      std::vector<double> y(c.reps), z(c.reps);
      for (std::size_t r = 0; r < c.reps; ++r) {
        y[r] = sqT * (J[r] - truth);
        z[r] = y[r] / std::sqrt(s2);
        auto x = row(c, tn, T, r);
        x.metrics = {{"J", J[r]}, {"z", z[r]}};
        out.rows.push_back(std::move(x));
      }
      const auto v = variance_with_se(y);
      auto a = row(c, tn, T);
      a.metrics = {{"R", static_cast<double>(c.reps)},
                   {"truth", truth},
                   {"mean", truth + v.mean / sqT},
                   {"T_var", v.var},
                   {"sigma2", s2},
                   {"sigma2_gauss", s2_gauss},
                   {"ratio", v.var / s2},
                   {"ratio_error", std::abs(v.var / s2 - 1.0)},
                   {"gauss_separation", std::abs(v.var - s2_gauss) / v.se}};
      a.se = {{"T_var", v.se}, {"ratio", v.se / s2}, {"mean", std::sqrt(v.var / c.reps) / sqT}};
      if (c.reps >= 50) {
        const auto exact = standard_normality(z);
        a.metrics.push_back({"ks_stat", exact.ks_stat});
        a.metrics.push_back({"ks_pvalue", exact.ks_pvalue});
        a.metrics.push_back({"skew", exact.skew});
        a.metrics.push_back({"kurt", exact.kurt});
        a.metrics.push_back({"plugin_ks_pvalue", normality_diagnostics(z).ks_pvalue});
      }
      out.aggregates.push_back(a);
    }
  }
  out.notes.push_back("ks_pvalue tests the standardized sample against N(0,1); plugin_ks_pvalue "
                      "uses plug-in moments and is a diagnostic only");
}

void run_whittle(const ExperimentConfig& c, RunReport& out) {
  const auto family = parse_model_spec(c.model);
  const auto driver = NoiseDriver::from_name(c.driver);
  WhittleOptions opts;
  opts.weight = parse_weight(c.option("weight", "none"));
  opts.oversample = c.option_size("oversample", 2);
  opts.kappa4 = driver.kappa4();
  const auto theta0 = std::vector<double>(family.theta().begin(), family.theta().end());
  const auto names = param_names(family);
  const std::size_t p = family.dim();
  for (const auto& tn : c.tapers) {
    const auto h = Taper::from_name(tn);
    const auto info = info_matrices(family, theta0, opts.weight, opts.kappa4, h);
    const double e = tapering_factor(h);
    for (std::size_t T : c.T) {
      const double sqT = std::sqrt(static_cast<double>(T));
      const auto fits = replicate(c, c.reps, c.seed, [&](std::size_t, std::uint64_t s) {
        return whittle_estimate(simulate(family, driver, T, s), h, family, opts);
      });
      std::size_t converged = 0, within = 0;
      for (std::size_t r = 0; r < c.reps; ++r) {
        const auto& f = fits[r];
        auto x = row(c, tn, T, r);
        for (std::size_t k = 0; k < p; ++k) x.metrics.push_back({names[k], f.theta_hat[k]});
        x.metrics.push_back({"scale_hat", f.scale_hat});
        x.metrics.push_back({"objective_value", f.objective_value});
        x.metrics.push_back({"iterations", static_cast<double>(f.iterations)});
        x.metrics.push_back({"converged", f.converged ? 1.0 : 0.0});
        for (std::size_t k = 0; k < p; ++k) x.metrics.push_back({"se_" + names[k], f.se[k]});
        out.rows.push_back(std::move(x));
        converged += f.converged;
        within += std::abs(f.theta_hat[0] - theta0[0]) < 0.05;
      }
      auto a = row(c, tn, T);
      a.metrics = {{"R", static_cast<double>(c.reps)}, {"e_h", e}};
      for (std::size_t k = 0; k < p; ++k) {
        std::vector<double> y(c.reps);
        for (std::size_t r = 0; r < c.reps; ++r) y[r] = sqT * (fits[r].theta_hat[k] - theta0[k]);
        const auto v = variance_with_se(y);
        const double asym = info.asym_cov(k, k);
        const std::string pre = k == 0 ? "" : names[k] + "_";
        a.metrics.push_back({pre + "theta0", theta0[k]});
        a.metrics.push_back({pre + "mean_theta_hat", theta0[k] + v.mean / sqT});
        a.metrics.push_back({pre + "var", v.var});
        a.metrics.push_back({pre + "asym_var", asym});
        a.metrics.push_back({pre + "var_over_gamma", v.var / (asym / e)});
        a.metrics.push_back({pre + "var_ratio", v.var / asym});
        a.se.push_back({pre + "var", v.se});
        a.se.push_back({pre + "var_ratio", v.se / asym});
      }
      a.metrics.push_back({"converged", static_cast<double>(converged) / c.reps});
      a.metrics.push_back({"within_005", static_cast<double>(within) / c.reps});
      out.aggregates.push_back(a);
    }
  }
  out.notes.push_back("var is Var(sqrt(T)(theta_hat - theta0)); var_ratio divides by e(h) Gamma^-1, "
                      "var_over_gamma by Gamma^-1 alone");
}

void run_gof(const ExperimentConfig& c, RunReport& out) {
  const auto model = parse_model_spec(c.model);
  const auto driver = NoiseDriver::from_name(c.driver);
  const auto mode = c.option("mode", "simple");
  if (mode != "simple" && mode != "composite") throw ConfigError("mode: expected simple|composite");
  const bool composite = mode == "composite";
  const auto builder = parse_basis(c.option("basis", composite ? "ar-example" : "cosine:3"));
  const double alpha = c.option_double("alpha", 0.05);
  const auto alt_spec = c.option("alternative", "");
  const std::optional<SpectralModel> alt =
      alt_spec.empty() ? std::nullopt : std::optional(parse_model_spec(alt_spec));
  CompositeOptions copt;
  copt.mixture_draws = c.option_size("mixture_draws", copt.mixture_draws);
  copt.whittle.kappa4 = driver.kappa4();

  // limit law at the true parameter
  MixtureLaw reference;
  const auto basis0 = builder(model);
  if (composite) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(composite_covariance(model, basis0));
    for (double w : es.eigenvalues()) {
      if (w < 1e-9) w = 0.0;
      if (std::abs(w - 1.0) < 1e-9) w = 1.0;
      reference.weights.push_back(w);
    }
  } else {
    reference.weights.assign(basis0.phi.size(), 1.0);
  }
  std::size_t ref_dof = 0;
  const bool chi_square = reference.is_chi_square(&ref_dof);
  const auto reference_sample =
      chi_square ? std::vector<double>{} : reference.sample(copt.mixture_draws, MixtureLaw::kMixtureSeed);

  auto test = [&](const TimeSeries& x, const Taper& h) {
    return composite ? composite_test(x.view(), h, model, builder, alpha, copt)
                     : simple_test(x.view(), h, model, basis0, alpha);
  };

  for (const auto& tn : c.tapers) {
    const auto h = Taper::from_name(tn);
    for (std::size_t T : c.T) {
      struct Outcome {
        GofResult null, alt;
      };
      const auto res = replicate(c, c.reps, c.seed, [&](std::size_t, std::uint64_t s) {
        Outcome o;
        o.null = test(simulate(model, driver, T, s), h);
        if (alt) o.alt = test(simulate(*alt, driver, T, s), h);
        return o;
      });
      std::vector<double> S(c.reps);
      std::size_t rejections = 0, alt_rejections = 0;
      for (std::size_t r = 0; r < c.reps; ++r) {
        const auto& o = res[r];
        S[r] = o.null.statistic;
        rejections += o.null.reject;
        auto x = row(c, tn, T, r);
        x.metrics = {{"S", o.null.statistic}, {"p_value", o.null.p_value}, {"reject", o.null.reject ? 1.0 : 0.0}};
        if (alt) {
          alt_rejections += o.alt.reject;
          x.metrics.push_back({"S_alt", o.alt.statistic});
          x.metrics.push_back({"p_value_alt", o.alt.p_value});
          x.metrics.push_back({"reject_alt", o.alt.reject ? 1.0 : 0.0});
        }
        out.rows.push_back(std::move(x));
      }
      const double size = static_cast<double>(rejections) / c.reps;
      auto a = row(c, tn, T);
      a.metrics = {{"R", static_cast<double>(c.reps)},
                   {"alpha", alpha},
                   {"m", static_cast<double>(basis0.phi.size())},
                   {"size", size},
                   {"mean_S", sample_moments(S).mean}};
      a.se = {{"size", rate_se(size, c.reps)}};
      if (chi_square) {
        a.metrics.push_back({"reference_dof", static_cast<double>(ref_dof)});
        a.metrics.push_back({"ks_distance", ks_vs_chi_square(S, ref_dof)});
      } else {
        a.metrics.push_back({"ks_distance", ks_two_sample(S, reference_sample)});
      }
      if (alt) {
        const double power = static_cast<double>(alt_rejections) / c.reps;
        const double se = std::hypot(rate_se(size, c.reps), rate_se(power, c.reps));
        a.metrics.push_back({"power", power});
        a.metrics.push_back({"power_excess", (power - size) / se});
        a.se.push_back({"power", rate_se(power, c.reps)});
      }
      out.aggregates.push_back(a);
    }
  }
  std::string law = "limit law at the true parameter: ";
  if (chi_square) {
    law += "chi-square with " + std::to_string(ref_dof) + " degrees of freedom";
  } else {
    law += "weighted chi-square mixture, weights";
    for (double w : reference.weights) law += " " + std::to_string(w);
  }
  out.notes.push_back(law);
  if (alt) out.notes.push_back("power_excess is (power - size) in units of the standard error of the difference");
}

void run_trace_experiment(const ExperimentConfig& c, RunReport& out) {
  const auto model = parse_model_spec(c.model);
  std::string gspec = c.option("g", "cos:1");
  std::string exps = c.option("exponents", "1,0");
  const auto pair = c.option("pair", "");
  if (!pair.empty()) {
    if (pair != "ar1xcos") throw ConfigError("pair: expected ar1xcos");
    if (model.family() != Family::ar1) throw ConfigError("pair: ar1xcos needs an ar1 model");
    gspec = "cos:1";
  }
  std::vector<double> ex;
  for (std::size_t start = 0;;) {
    const auto comma = exps.find(',', start);
    const auto item = exps.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    char* end = nullptr;
    ex.push_back(std::strtod(item.c_str(), &end));
    if (item.empty() || *end != '\0') throw ConfigError("exponents: not a number list: '" + exps + "'");
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (ex.size() != 2) throw ConfigError("exponents: expected two taper exponents");
  const auto g = GeneratingFunction::parse(gspec);
  const std::vector<GeneratingFunction> psis{GeneratingFunction::from_model(model), g};
  for (const auto& tn : c.tapers) {
    const auto h = Taper::from_name(tn);
    const double M = trace_limit(psis, h, ex);
    // closed form 2 pi H_{2 sum a} r(u) when g = cos(u lambda): int f cos(u .) = r(u)
    double oracle = NAN;
    if (g.kind() == GeneratingKind::cosine) {
      long lag = 0;
      while (std::abs(g.fourier(lag)) < 1.0) ++lag;  // g^ is pi at +-u, 2 pi at u = 0
      oracle = 2.0 * kPi * taper_moment(h, static_cast<int>(std::lround(2.0 * (ex[0] + ex[1])))) *
               model.covariance(lag);
    }
    std::vector<double> deltas;
    for (std::size_t T : c.T) {
      const std::vector<TaperedToeplitzMatrix> mats{build_matrix(psis[0], h, T, ex[0]),
                                                    build_matrix(psis[1], h, T, ex[1])};
      const double S = trace_product(mats);
      deltas.push_back(std::abs(S - M));
      auto x = row(c, tn, T);
      x.metrics = {{"S", S}, {"M", M}, {"Delta", deltas.back()}};
      out.rows.push_back(std::move(x));
    }
    std::size_t steps = 0;
    for (std::size_t k = 0; k + 1 < deltas.size(); ++k) steps += deltas[k + 1] < deltas[k];
    auto a = row(c, tn, c.T.back());
    a.metrics = {{"limit", M},
                 {"oracle_limit", oracle},
                 {"limit_error", std::abs(M - oracle)},
                 {"decreasing_steps", static_cast<double>(steps)},
                 {"steps", static_cast<double>(deltas.size() - 1)},
                 {"final_delta", deltas.back()},
                 {"min_delta", *std::min_element(deltas.begin(), deltas.end())}};
    out.aggregates.push_back(a);
  }
  out.notes.push_back("S = (1/T) tr[A(f) A(g)] with entries psi^(t - s) (h_t h_s)^a, exponents a = " + exps +
                      "; M is the limit and Delta = |S - M|");
}

void run_fejer(const ExperimentConfig& c, RunReport& out) {
  const auto model = parse_model_spec(c.model);
  const auto g = GeneratingFunction::parse(c.option("g", "cos:1"));
  const double delta = c.option_double("delta", 0.5);
  const auto T2 = c.option_size("delta2_T", 2048);
  for (const auto& tn : c.tapers) {
    const auto h = Taper::from_name(tn);
    double worst = 0.0, prev = INFINITY;
    bool decreasing = true;
    for (std::size_t T : c.T) {
      std::size_t n = std::size_t{1} << 14;
      while (n < 4 * T) n <<= 1;
      const auto F = fejer_kernel2_on_grid(h, T, n);
      const double w = 2.0 * kPi / static_cast<double>(n);
      double mass = 0.0, tail = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double u = -kPi + w * static_cast<double>(j);
        mass += F[j] * w;
        if (std::abs(u) > delta) tail += F[j] * w;
      }
      worst = std::max(worst, std::abs(mass - 1.0));
      decreasing = decreasing && tail < prev;
      prev = tail;
      auto x = row(c, tn, T);
      x.metrics = {{"normalization_error", std::abs(mass - 1.0)}, {"tail_mass", tail}};
      out.rows.push_back(std::move(x));
    }
    const double d2 = fejer_smoothing_error(model, g, h, T2);
    auto a = row(c, tn, T2);
    a.metrics = {{"normalization_error", worst},
                 {"tail_decreasing", decreasing ? 1.0 : 0.0},
                 {"delta2", d2},
                 {"sqrtT_delta2", std::sqrt(static_cast<double>(T2)) * std::abs(d2)}};
    out.aggregates.push_back(a);
  }
  out.notes.push_back("tail mass beyond |u| > " + std::to_string(delta) + "; delta2 uses g = " + g.name() +
                      " and the model density");
}

void run_robustness(const ExperimentConfig& c, RunReport& out) {
  RobustnessConfig base;
  base.model = parse_model_spec(c.model);
  base.driver = NoiseDriver::from_name(c.driver);
  base.trend = Trend::parse(c.option("trend", "power:1,0.6"));
  base.g = GeneratingFunction::parse(c.option("g", "cos:1"));
  base.reps = c.reps;
  base.seed = c.seed;
  base.parallel = !c.serial;
  const auto target_opt = c.option("target", "functional");
  std::vector<std::string> targets;
  if (target_opt == "both") targets = {"functional", "whittle"};
  else targets = {target_opt};
  for (const auto& tn : c.tapers) {
    base.taper = Taper::from_name(tn);
    for (const auto& target : targets) {
      base.target = parse_robustness_target(target);
      std::vector<RobustnessReport> reports;
      for (std::size_t T : c.T) {
        auto cfg = base;
        cfg.T = T;
        reports.push_back(robustness_report(cfg));
        const auto& r = reports.back();
        for (std::size_t i = 0; i < r.reps; ++i) {
          auto x = row(c, tn, T, i);
          x.experiment = c.id + "/" + target;
          x.metrics = {{"clean", r.clean[i]}, {"contaminated", r.contaminated[i]}, {"gap", r.gaps[i]}};
          out.rows.push_back(std::move(x));
        }
        auto a = row(c, tn, T);
        a.experiment = c.id + "/" + target;
        a.metrics = {{"R", static_cast<double>(r.reps)},
                     {"truth", r.truth},
                     {"asymptotic_sd", r.asymptotic_sd},
                     {"bias_clean", r.bias_clean},
                     {"bias_contaminated", r.bias_contaminated},
                     {"var_clean", r.var_clean},
                     {"var_contaminated", r.var_contaminated},
                     {"variance_ratio", r.variance_ratio},
                     {"asymptotic_ratio", r.var_contaminated / (r.asymptotic_sd * r.asymptotic_sd)},
                     {"ks_distance", r.ks_distance},
                     {"median_gap", r.median_gap}};
        a.se = {{"median_gap", r.median_gap_se}};
        out.aggregates.push_back(a);
      }
      if (reports.size() >= 2) {
        const auto lad = ladder_from_reports(reports);
        auto a = row(c, tn, c.T.back());
        a.experiment = c.id + "/" + target + "/ladder";
        a.metrics = {{"gap_nonincreasing", lad.nonincreasing ? 1.0 : 0.0},
                     {"gap_shrinking", lad.shrinking ? 1.0 : 0.0}};
        out.aggregates.push_back(a);
      }
    }
  }
  out.notes.push_back("paired design: Y = X + M from the same innovations; trend " + base.trend.spec() +
                      (base.trend.in_theorem_range() ? "" : " (outside beta > 1/4)"));
}

void run_qf_distribution(const ExperimentConfig& c, RunReport& out) {
  const auto model = parse_model_spec(c.model);
  const auto driver = NoiseDriver::from_name(c.driver);
  const auto g = GeneratingFunction::parse(c.option("g", "cos:1"));
  for (const auto& tn : c.tapers) {
    const auto h = Taper::from_name(tn);
    for (std::size_t T : c.T) {
      const auto dist = qf_distribution(model, g, h, T);
      const auto q = replicate(c, c.reps, c.seed, [&](std::size_t, std::uint64_t s) {
        return quadratic_form(simulate(model, driver, T, s), h, g);
      });
      const double n = static_cast<double>(c.reps);
      double m = 0.0;
      for (double v : q) m += v;
      m /= n;
      double m2 = 0.0, m3 = 0.0;
      for (double v : q) {
        const double d = v - m;
        m2 += d * d;
        m3 += d * d * d;
      }
      // unbiased k-statistics
      m2 /= n - 1.0;
      m3 *= n / ((n - 1.0) * (n - 2.0));
      double k[7];
      for (int j = 1; j <= 6; ++j) k[j] = dist.cumulant(j);
      // large-sample standard errors of the sample mean, variance and third central moment
      const double se1 = std::sqrt(k[2] / n);
      const double se2 = std::sqrt((k[4] + 2.0 * k[2] * k[2]) / n);
      const double se3 = std::sqrt((k[6] + 9.0 * k[4] * k[2] + 9.0 * k[3] * k[3] + 6.0 * k[2] * k[2] * k[2]) / n);
      const double z1 = (m - k[1]) / se1, z2 = (m2 - k[2]) / se2, z3 = (m3 - k[3]) / se3;
      for (std::size_t r = 0; r < c.reps; ++r) {
        auto x = row(c, tn, T, r);
        x.metrics = {{"Q", q[r]}};
        out.rows.push_back(std::move(x));
      }
      const auto sampler = dist.sample(c.reps, derive_seed(c.seed, ~std::uint64_t{0}));
      auto a = row(c, tn, T);
      a.metrics = {{"R", n},
                   {"chi1", k[1]},
                   {"chi2", k[2]},
                   {"chi3", k[3]},
                   {"k1", m},
                   {"k2", m2},
                   {"k3", m3},
                   {"z1", z1},
                   {"z2", z2},
                   {"z3", z3},
                   {"cumulant_z", std::max({std::abs(z1), std::abs(z2), std::abs(z3)})},
                   {"ks_distance", ks_two_sample(q, sampler)},
                   {"rank", static_cast<double>(dist.rank)},
                   {"symmetric_path", dist.symmetric_path ? 1.0 : 0.0}};
      a.se = {{"k1", se1}, {"k2", se2}, {"k3", se3}};
      out.aggregates.push_back(a);
    }
  }
  if (NoiseDriver::from_name(c.driver).kappa4() != 0.0)
    out.notes.push_back("non-Gaussian driver: the eigenvalue mixture is the Gaussian law only");
}

}  // namespace taperspec::detail
