#include "taperspec/robustness.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "taperspec/errors.hpp"
#include "taperspec/replicate.hpp"
#include "taperspec/stats.hpp"
#include "taperspec/whittle.hpp"

namespace taperspec {
namespace {

double parse_double(std::string_view s, std::string_view what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ConfigError("trend: cannot read " + std::string(what) + " from '" + std::string(s) + "'");
  return v;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

struct Pair {
  double x = 0.0, y = 0.0;
};

}  // namespace

Trend Trend::zero() { return Trend{}; }

Trend Trend::power_decay(double c, double beta) {
  if (!(beta > 0.25))
    throw DomainError("power_decay trend needs beta > 1/4 (use power_decay_unchecked for controls)");
  return power_decay_unchecked(c, beta);
}

Trend Trend::power_decay_unchecked(double c, double beta) {
  if (!std::isfinite(c) || !std::isfinite(beta)) throw DomainError("power_decay: non-finite parameter");
  Trend t;
  t.kind_ = TrendKind::power_decay;
  t.c_ = c;
  t.beta_ = beta;
  t.name_ = "power";
  return t;
}

Trend Trend::custom(std::function<double(std::size_t)> fn, std::string name) {
  if (!fn) throw DomainError("custom trend without a function");
  Trend t;
  t.kind_ = TrendKind::custom;
  t.fn_ = std::move(fn);
  t.name_ = std::move(name);
  return t;
}

Trend Trend::parse(std::string_view spec) {
  if (spec == "zero" || spec == "none") return zero();
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) throw ConfigError("trend '" + std::string(spec) + "': expected power:c,beta");
  const auto kind = spec.substr(0, colon);
  const auto args = spec.substr(colon + 1);
  const auto comma = args.find(',');
  if (comma == std::string_view::npos) throw ConfigError("trend '" + std::string(spec) + "': expected c,beta");
  const double c = parse_double(args.substr(0, comma), "c");
  const double beta = parse_double(args.substr(comma + 1), "beta");
  if (kind == "power") return power_decay(c, beta);
  if (kind == "power-unchecked") return power_decay_unchecked(c, beta);
  throw ConfigError("unknown trend kind '" + std::string(kind) + "'");
}

bool Trend::in_theorem_range() const noexcept {
  switch (kind_) {
    case TrendKind::zero: return true;
    case TrendKind::power_decay: return beta_ > 0.25;
    case TrendKind::custom: return false;
  }
  return false;
}

std::string Trend::spec() const {
  switch (kind_) {
    case TrendKind::zero: return "zero";
    case TrendKind::power_decay: return "power:" + fmt(sign_ * c_) + "," + fmt(beta_);
    case TrendKind::custom: return (sign_ < 0 ? "-" : "") + name_;
  }
  return name_;
}

Trend Trend::negated() const {
  Trend t = *this;
  t.sign_ = -sign_;
  return t;
}

double Trend::operator()(std::size_t t) const {
  if (t < 1) throw DomainError("trends are indexed from t = 1");
  switch (kind_) {
    case TrendKind::zero: return 0.0;
    case TrendKind::power_decay: return sign_ * c_ * std::pow(static_cast<double>(t), -beta_);
    case TrendKind::custom: return sign_ * fn_(t);
  }
  return 0.0;
}

TimeSeries contaminate(const TimeSeries& series, const Trend& trend) {
  TimeSeries y = series;
  if (trend.kind() != TrendKind::zero)
    for (std::size_t t = 0; t < y.values.size(); ++t) y.values[t] += trend(t + 1);
  y.provenance.trend = y.provenance.trend.empty() ? trend.spec() : y.provenance.trend + "+" + trend.spec();
  return y;
}

double functional_gap(const TimeSeries& series, const Trend& trend, const Taper& taper,
                      const GeneratingFunction& g) {
  const std::size_t T = series.size();
  const auto grid = canonical_grid(T, 2);
  const auto gv = g.on_grid(grid);
  const double jx = plugin_value(tapered_periodogram(series, taper, grid), gv);
  const double jy = plugin_value(tapered_periodogram(contaminate(series, trend), taper, grid), gv);
  return std::sqrt(static_cast<double>(T)) * std::abs(jy - jx);
}

RobustnessTarget parse_robustness_target(std::string_view name) {
  if (name == "functional") return RobustnessTarget::functional;
  if (name == "whittle") return RobustnessTarget::whittle;
  throw ConfigError("unknown robustness target '" + std::string(name) + "' (expected functional|whittle)");
}

RobustnessReport robustness_report(const RobustnessConfig& cfg) {
  if (cfg.reps < 2) throw DomainError("robustness_report needs at least 2 replications");
  RobustnessReport rep;
  rep.T = cfg.T;
  rep.reps = cfg.reps;
  const double sqT = std::sqrt(static_cast<double>(cfg.T));
  const double kappa4 = cfg.driver.kappa4();

  std::function<Pair(std::size_t, std::uint64_t)> one;
  if (cfg.target == RobustnessTarget::functional) {
    rep.truth = true_functional(cfg.model, cfg.g);
    rep.asymptotic_sd = std::sqrt(asymptotic_variance(cfg.model, cfg.g, cfg.taper, kappa4));
    const auto grid = canonical_grid(cfg.T, 2);
    const auto gv = cfg.g.on_grid(grid);
    one = [&, grid, gv](std::size_t, std::uint64_t seed) {
      const auto x = simulate(cfg.model, cfg.driver, cfg.T, seed);
      return Pair{plugin_value(tapered_periodogram(x, cfg.taper, grid), gv),
                  plugin_value(tapered_periodogram(contaminate(x, cfg.trend), cfg.taper, grid), gv)};
    };
  } else {
    rep.truth = cfg.model.theta()[0];
    rep.asymptotic_sd =
        std::sqrt(info_matrices(cfg.model, cfg.model.theta(), {}, kappa4, cfg.taper).asym_cov(0, 0));
    one = [&](std::size_t, std::uint64_t seed) {
      const auto x = simulate(cfg.model, cfg.driver, cfg.T, seed);
      return Pair{whittle_estimate(x, cfg.taper, cfg.model).theta_hat[0],
                  whittle_estimate(contaminate(x, cfg.trend), cfg.taper, cfg.model).theta_hat[0]};
    };
  }
  const auto pairs = cfg.parallel ? kernels::replicate(cfg.reps, cfg.seed, one)
                                  : reference::replicate(cfg.reps, cfg.seed, one);

  std::vector<double> zx, zy;
  for (const auto& p : pairs) {
    rep.clean.push_back(sqT * (p.x - rep.truth));
    rep.contaminated.push_back(sqT * (p.y - rep.truth));
    rep.gaps.push_back(sqT * std::abs(p.y - p.x));
    zx.push_back(rep.clean.back() / rep.asymptotic_sd);
    zy.push_back(rep.contaminated.back() / rep.asymptotic_sd);
  }
  const auto mx = sample_moments(rep.clean), my = sample_moments(rep.contaminated);
  rep.bias_clean = mx.mean / sqT;
  rep.bias_contaminated = my.mean / sqT;
  rep.var_clean = mx.variance;
  rep.var_contaminated = my.variance;
  rep.variance_ratio = my.variance / mx.variance;
  rep.ks_distance = ks_two_sample(zx, zy);
  if (cfg.reps >= 50) {
    rep.ks_pvalue_clean = standard_normality(zx).ks_pvalue;
    rep.ks_pvalue_contaminated = standard_normality(zy).ks_pvalue;
  }
  rep.median_gap = median(rep.gaps);
  rep.median_gap_se = cfg.reps >= 4 ? median_se(rep.gaps) : 0.0;
  return rep;
}

GapLadder ladder_from_reports(const std::vector<RobustnessReport>& reports) {
  if (reports.size() < 2) throw DomainError("a gap ladder needs at least two lengths");
  GapLadder out;
  for (const auto& r : reports) {
    out.T.push_back(r.T);
    out.median.push_back(r.median_gap);
    out.se.push_back(r.median_gap_se);
  }
  out.nonincreasing = true;
  for (std::size_t k = 0; k + 1 < out.median.size(); ++k)
    if (out.median[k + 1] > out.median[k] + out.se[k]) out.nonincreasing = false;
  out.shrinking = out.median.back() < 0.5 * out.median.front();
  return out;
}

GapLadder gap_ladder(RobustnessConfig config, const std::vector<std::size_t>& Ts) {
  if (Ts.size() < 2) throw DomainError("gap_ladder needs at least two lengths");
  std::vector<RobustnessReport> reports;
  for (std::size_t T : Ts) {
    config.T = T;
    reports.push_back(robustness_report(config));
  }
  return ladder_from_reports(reports);
}

}  // namespace taperspec
