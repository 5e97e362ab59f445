#include "taperspec/functionals.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

#include "fft.hpp"
#include "taperspec/errors.hpp"
#include "taperspec/quadrature.hpp"

namespace taperspec {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kMaxOscillationCuts = 256;

double wrap(double lambda) {
  if (lambda >= -kPi && lambda <= kPi) return lambda;
  return lambda - 2.0 * kPi * std::round(lambda / (2.0 * kPi));
}

std::string fmt(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::vector<double> merge_cuts(std::vector<double> a, const std::vector<double>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

// Does g stay away from zero next to the origin? Decides divergence at a pole.
bool nonzero_at_origin(const GeneratingFunction& g) {
  for (double l : {1e-7, 1e-5, 1e-3})
    if (std::abs(g(l)) > 1e-12) return true;
  return false;
}

// c_h(u) = sum_t h_t h_{t+u}, u = 0..T-1.
std::vector<double> taper_autocorrelation(const Taper& taper, std::size_t T) {
  const auto h = taper.weights(T);
  return reference::lagged_products(h, T - 1);
}

}  // namespace

// ---------------------------------------------------------------------------
// GeneratingFunction

GeneratingFunction GeneratingFunction::zero() {
  auto s = std::make_shared<State>();
  s->kind = GeneratingKind::zero;
  s->name = "zero";
  return GeneratingFunction(std::move(s));
}

GeneratingFunction GeneratingFunction::cosine(long u) {
  auto s = std::make_shared<State>();
  s->kind = GeneratingKind::cosine;
  s->lag = std::abs(u);
  s->name = s->lag == 0 ? "one" : "cos:" + std::to_string(s->lag);
  return GeneratingFunction(std::move(s));
}

GeneratingFunction GeneratingFunction::indicator(double mu) {
  if (!(mu > 0.0) || mu > kPi) throw DomainError("indicator requires 0 < mu <= pi");
  auto s = std::make_shared<State>();
  s->kind = GeneratingKind::indicator;
  s->mu = mu;
  s->name = "ind:" + fmt(mu);
  if (mu < kPi) s->breakpoints = {mu};
  return GeneratingFunction(std::move(s));
}

GeneratingFunction GeneratingFunction::from_model(const SpectralModel& model) {
  auto s = std::make_shared<State>();
  s->kind = GeneratingKind::model_density;
  s->model = std::make_shared<const SpectralModel>(model);
  s->name = "density:" + model.spec();
  s->pole_exponent = std::max(0.0, model.pole_exponent());
  return GeneratingFunction(std::move(s));
}

GeneratingFunction GeneratingFunction::custom(std::function<double(double)> fn,
                                              bool bounded_variation, std::string name,
                                              std::function<double(long)> fourier,
                                              std::vector<double> breakpoints) {
  if (!fn) throw DomainError("custom generating function without a callable");
  for (double l : {0.3, 1.1, 2.9})
    if (std::abs(fn(l) - fn(-l)) > 1e-12 * std::max(1.0, std::abs(fn(l))))
      throw DomainError("generating function '" + name + "' is not even");
  auto s = std::make_shared<State>();
  s->kind = GeneratingKind::custom;
  s->name = std::move(name);
  s->bounded_variation = bounded_variation;
  s->fn = std::move(fn);
  s->fourier = std::move(fourier);
  s->breakpoints = std::move(breakpoints);
  return GeneratingFunction(std::move(s));
}

GeneratingFunction GeneratingFunction::parse(std::string_view text) {
  auto number = [&](std::string_view v) {
    double x = 0.0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
      throw ConfigError("generating function '" + std::string(text) + "': bad number");
    return x;
  };
  if (text == "zero") return zero();
  if (text == "one") return constant_one();
  const auto colon = text.find(':');
  if (colon != std::string_view::npos) {
    const auto head = text.substr(0, colon);
    const auto arg = text.substr(colon + 1);
    if (head == "cos" || head == "cosine") {
      const double u = number(arg);
      if (u != std::floor(u)) throw ConfigError("cosine lag must be an integer");
      return cosine(static_cast<long>(u));
    }
    if (head == "ind" || head == "indicator") return indicator(number(arg));
  }
  throw ConfigError("unknown generating function '" + std::string(text) +
                    "' (expected cos:u | ind:mu | one | zero)");
}

double GeneratingFunction::operator()(double lambda) const {
  const auto& s = *state_;
  switch (s.kind) {
    case GeneratingKind::zero: return 0.0;
    case GeneratingKind::cosine: return std::cos(static_cast<double>(s.lag) * lambda);
    case GeneratingKind::indicator: return std::abs(wrap(lambda)) <= s.mu ? 0.5 : 0.0;
    case GeneratingKind::model_density: return s.model->density(wrap(lambda));
    case GeneratingKind::custom: return s.fn(wrap(lambda));
  }
  return 0.0;
}

double GeneratingFunction::fourier(long t) const {
  const auto& s = *state_;
  const long a = std::abs(t);
  switch (s.kind) {
    case GeneratingKind::zero: return 0.0;
    case GeneratingKind::cosine:
      if (s.lag == 0) return a == 0 ? 2.0 * kPi : 0.0;
      return a == s.lag ? kPi : 0.0;
    case GeneratingKind::indicator:
      return a == 0 ? s.mu : std::sin(s.mu * static_cast<double>(a)) / static_cast<double>(a);
    case GeneratingKind::model_density: return s.model->covariance(a);
    case GeneratingKind::custom: {
      if (s.fourier) return s.fourier(a);
      std::vector<double> cuts = s.breakpoints;
      const int n = static_cast<int>(std::min<long>(a, kMaxOscillationCuts));
      for (int k = 1; k < n; ++k) cuts.push_back(kPi * k / n);
      const double u = static_cast<double>(a);
      return quad::integrate_even([&](double l) { return s.fn(l) * std::cos(u * l); }, false,
                                  merge_cuts(cuts, {}));
    }
  }
  return 0.0;
}

std::vector<double> GeneratingFunction::fourier_coefficients(std::size_t n) const {
  std::vector<double> out(n, 0.0);
  if (n == 0) return out;
  if (state_->kind == GeneratingKind::model_density) return state_->model->covariances(n - 1);
  if (state_->kind == GeneratingKind::cosine) {
    if (static_cast<std::size_t>(state_->lag) < n) out[state_->lag] = fourier(state_->lag);
    return out;
  }
  for (std::size_t t = 0; t < n; ++t) out[t] = fourier(static_cast<long>(t));
  return out;
}

std::vector<double> GeneratingFunction::on_grid(const FrequencyGrid& grid) const {
  std::vector<double> out(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) out[j] = (*this)(grid.points[j]);
  return out;
}

std::vector<double> GeneratingFunction::breakpoints() const {
  std::vector<double> cuts = state_->breakpoints;
  if (state_->kind == GeneratingKind::cosine && state_->lag > 1) {
    const long n = std::min<long>(state_->lag, kMaxOscillationCuts);
    for (long k = 1; k < n; ++k) cuts.push_back(kPi * static_cast<double>(k) / static_cast<double>(n));
  }
  return merge_cuts(cuts, {});
}

// ---------------------------------------------------------------------------
// Functionals and variances

double true_functional(const SpectralModel& model, const GeneratingFunction& g) {
  if (g.is_zero()) return 0.0;
  const double alpha = std::max(0.0, model.pole_exponent()) + g.pole_exponent();
  if (alpha >= 1.0) throw DivergenceError("f g is not integrable at the origin");
  const bool pole = alpha > 0.0;
  const auto cuts = g.breakpoints();
  return quad::integrate_even([&](double l) { return model.density(l) * g(l); }, pole, cuts);
}

double squared_functional(const SpectralModel& model, const GeneratingFunction& g) {
  if (g.is_zero()) return 0.0;
  const double alpha = std::max(0.0, model.pole_exponent()) + g.pole_exponent();
  if (2.0 * alpha >= 1.0 && nonzero_at_origin(g))
    throw DivergenceError("f^2 g^2 is not integrable at the origin (pole exponent " +
                          fmt(2.0 * alpha) + ")");
  const bool pole = alpha > 0.0;
  const auto cuts = g.breakpoints();
  return quad::integrate_even(
      [&](double l) {
        const double v = model.density(l) * g(l);
        return v * v;
      },
      pole, cuts);
}

double asymptotic_variance(const SpectralModel& model, const GeneratingFunction& g,
                           const Taper& taper, double kappa4) {
  if (g.is_zero()) return 0.0;
  const double e = taper.factor();
  const double j = true_functional(model, g);
  return 4.0 * kPi * e * squared_functional(model, g) + kappa4 * e * j * j;
}

double plugin_value(const Periodogram& pgram, std::span<const double> g_on_grid) {
  if (g_on_grid.size() != pgram.size()) throw ShapeError("g and periodogram grids differ");
  double acc = 0.0;
  const auto& w = pgram.grid.weights;
  for (std::size_t j = 0; j < pgram.size(); ++j) acc += pgram.values[j] * g_on_grid[j] * w[j];
  return acc;
}

std::vector<double> smoothed_periodogram(const Periodogram& pgram) {
  const std::size_t n = pgram.size();
  const auto m = static_cast<std::size_t>(std::ceil(std::cbrt(static_cast<double>(pgram.T))));
  // window half-width in grid points: m Fourier frequencies
  std::size_t K = m;
  if (pgram.grid.canonical()) K = std::max<std::size_t>(1, m * n / pgram.T);
  std::vector<double> wts(K + 1);
  double total = 0.0;
  for (std::size_t k = 0; k <= K; ++k) {
    wts[k] = 1.0 - static_cast<double>(k) / static_cast<double>(K + 1);
    total += (k == 0 ? 1.0 : 2.0) * wts[k];
  }
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    double acc = wts[0] * pgram.values[j];
    for (std::size_t k = 1; k <= K; ++k)
      acc += wts[k] * (pgram.values[(j + k) % n] + pgram.values[(j + n - k % n) % n]);
    out[j] = acc / total;
  }
  return out;
}

FunctionalEstimate plugin_estimate(const Periodogram& pgram, const GeneratingFunction& g,
                                   const Taper& taper, const VarianceInput& variance) {
  FunctionalEstimate est;
  const auto gv = g.on_grid(pgram.grid);
  est.value = plugin_value(pgram, gv);
  est.T = pgram.T;
  est.taper = pgram.taper;
  est.g = g.name();
  const double e = taper.factor();
  double sigma2 = 0.0;
  if (variance.model) {
    sigma2 = asymptotic_variance(*variance.model, g, taper, variance.kappa4);
    est.variance_source = "model";
  } else {
    const auto fhat = smoothed_periodogram(pgram);
    double s2 = 0.0, s1 = 0.0;
    for (std::size_t j = 0; j < pgram.size(); ++j) {
      const double v = fhat[j] * gv[j];
      s2 += v * v * pgram.grid.weights[j];
      s1 += v * pgram.grid.weights[j];
    }
    sigma2 = 4.0 * kPi * e * s2 + variance.kappa4 * e * s1 * s1;
    est.variance_source = "bartlett";
  }
  est.variance_hat = std::max(0.0, sigma2) / static_cast<double>(pgram.T);
  return est;
}

// ---------------------------------------------------------------------------
// Quadratic form

std::vector<double> kernels::lagged_products(std::span<const double> y, std::size_t max_lag) {
  const std::size_t n = y.size();
  const long lags = static_cast<long>(std::min(max_lag, n == 0 ? 0 : n - 1));
  std::vector<double> L(max_lag + 1, 0.0);
#pragma omp parallel for schedule(dynamic, 16)
  for (long k = 0; k <= lags; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    double acc = 0.0;
    for (std::size_t t = 0; t + kk < n; ++t) acc += y[t] * y[t + kk];
    L[kk] = acc;
  }
  return L;
}

std::vector<double> reference::lagged_products(std::span<const double> y, std::size_t max_lag) {
  const std::size_t n = y.size();
  std::vector<double> L(max_lag + 1, 0.0);
  for (std::size_t k = 0; k <= max_lag && k < n; ++k) {
    double acc = 0.0;
    for (std::size_t t = 0; t + k < n; ++t) acc += y[t] * y[t + k];
    L[k] = acc;
  }
  return L;
}

namespace {
double combine(std::span<const double> L, std::span<const double> ghat) {
  double acc = ghat[0] * L[0];
  for (std::size_t k = 1; k < L.size() && k < ghat.size(); ++k) acc += 2.0 * ghat[k] * L[k];
  return acc;
}

std::vector<double> tapered(std::span<const double> x, const Taper& taper) {
  const auto h = taper.weights(x.size());
  std::vector<double> y(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) y[t] = h[t] * x[t];
  return y;
}
}  // namespace

double kernels::quadratic_form(std::span<const double> y, std::span<const double> ghat) {
  if (ghat.empty()) return 0.0;
  return combine(kernels::lagged_products(y, ghat.size() - 1), ghat);
}

double reference::quadratic_form(std::span<const double> y, std::span<const double> ghat) {
  if (ghat.empty()) return 0.0;
  return combine(reference::lagged_products(y, ghat.size() - 1), ghat);
}

double reference::quadratic_form_direct(std::span<const double> x, const Taper& taper,
                                        const GeneratingFunction& g) {
  const std::size_t T = x.size();
  const auto ghat = g.fourier_coefficients(T);
  const auto y = tapered(x, taper);
  double acc = 0.0;
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t s = 0; s < T; ++s) acc += ghat[t > s ? t - s : s - t] * y[t] * y[s];
  return acc;
}

double quadratic_form(std::span<const double> x, const Taper& taper, const GeneratingFunction& g) {
  const std::size_t T = x.size();
  if (T > kQuadraticFormMaxT)
    throw SizeError("quadratic_form: T = " + std::to_string(T) + " exceeds 2^14; use plugin_estimate");
  if (T == 0 || g.is_zero()) return 0.0;
  const auto ghat = g.fourier_coefficients(T);
  const auto y = tapered(x, taper);
  return kernels::quadratic_form(y, ghat);
}

double quadratic_form(const TimeSeries& series, const Taper& taper, const GeneratingFunction& g) {
  return quadratic_form(series.view(), taper, g);
}

// ---------------------------------------------------------------------------
// Convenience estimators

FunctionalEstimate covariance_estimate(const TimeSeries& series, const Taper& taper, long u,
                                       const VarianceInput& variance, std::size_t oversample) {
  const auto grid = canonical_grid(series.size(), oversample);
  const auto pg = tapered_periodogram(series, taper, grid);
  return plugin_estimate(pg, GeneratingFunction::cosine(u), taper, variance);
}

FunctionalEstimate spectral_function_estimate(const TimeSeries& series, const Taper& taper,
                                              double mu, const VarianceInput& variance,
                                              std::size_t oversample) {
  if (!(mu > 0.0) || mu > kPi) throw DomainError("spectral_function_estimate requires 0 < mu <= pi");
  const auto grid = canonical_grid(series.size(), oversample);
  const auto pg = tapered_periodogram(series, taper, grid);
  return plugin_estimate(pg, GeneratingFunction::indicator(mu), taper, variance);
}

double expected_plugin(const SpectralModel& model, const GeneratingFunction& g, const Taper& taper,
                       std::size_t T) {
  const auto ch = taper_autocorrelation(taper, T);
  const auto r = model.covariances(T - 1);
  const auto ghat = g.fourier_coefficients(T);
  double acc = ch[0] * r[0] * ghat[0];
  for (std::size_t u = 1; u < T; ++u) acc += 2.0 * ch[u] * r[u] * ghat[u];
  return acc / (2.0 * kPi * ch[0]);
}

double fejer_smoothing_error(const SpectralModel& model, const GeneratingFunction& g,
                             const Taper& taper, std::size_t T) {
  if (T < 2) throw SizeError("fejer_smoothing_error requires T >= 2");
  const std::size_t n = std::max<std::size_t>(256, detail::next_pow2(2 * T));
  if (n > (std::size_t{1} << 16)) throw SizeError("fejer_smoothing_error: grid too large");
  const bool pole = model.has_pole() || g.has_pole();
  // m on u_j = -pi + 2 pi j / n; l on the same grid, shifted by half a step near a pole, so
  // that l_i + m_j lands on the l grid at index (i + j - n/2) mod n.
  const auto F = fejer_kernel2_on_grid(taper, T, n);
  const double delta = pole ? 0.5 : 0.0;
  const double w = 2.0 * kPi / static_cast<double>(n);
  std::vector<double> G(n), f(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double l = -kPi + w * (static_cast<double>(i) + delta);
    G[i] = g(l);
    f[i] = model.density(l);
  }
  if (!std::all_of(f.begin(), f.end(), [](double v) { return std::isfinite(v); }))
    throw DivergenceError("density not finite on the smoothing grid");
  const std::size_t half = n / 2;
  std::vector<double> terms(n);
#pragma omp parallel for schedule(static)
  for (long li = 0; li < static_cast<long>(n); ++li) {
    const auto i = static_cast<std::size_t>(li);
    double conv = 0.0;
    for (std::size_t j = 0; j < n; ++j) conv += G[(i + j + n - half) % n] * F[j];
    terms[i] = f[i] * (conv * w - G[i]);
  }
  // ordered sum keeps the result independent of the thread count
  double acc = 0.0;
  for (double v : terms) acc += v;
  if (!std::isfinite(acc)) throw DivergenceError("Fejer smoothing integral diverged");
  return acc * w;
}

}  // namespace taperspec
