#include "taperspec/taper.hpp"

#include <cmath>
#include <numbers>

#include "fft.hpp"
#include "taperspec/errors.hpp"
#include "taperspec/quadrature.hpp"

namespace taperspec {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kNonnegativityGrid = 4096;

double integrate_power(const std::function<double(double)>& fn, int k) {
  return quad::adaptive_simpson([&](double t) { return std::pow(fn(t), k); }, 0.0, 1.0, 1e-12);
}

}  // namespace

Taper Taper::build(TaperId id, std::string name, std::function<double(double)> fn,
                   bool bounded_variation) {
  auto state = std::make_shared<State>();
  state->id = id;
  state->name = std::move(name);
  state->fn = std::move(fn);
  state->bounded_variation = bounded_variation;
  for (int k = 1; k <= kCachedMoments; ++k) state->moments[k - 1] = integrate_power(state->fn, k);
  const double h2 = state->moments[1];
  if (!(h2 > 0.0)) throw InvalidTaperError("taper '" + state->name + "' has H_2 = 0");
  state->factor = state->moments[3] / (h2 * h2);
  return Taper(std::move(state));
}

Taper Taper::rectangular() {
  return build(TaperId::rectangular, "rect", [](double) { return 1.0; }, true);
}

Taper Taper::linear() {
  return build(TaperId::linear, "linear", [](double t) { return 1.0 - t; }, true);
}

Taper Taper::tukey_hanning() {
  return build(TaperId::tukey_hanning, "tukey",
               [](double t) { return 0.5 * (1.0 - std::cos(kPi * t)); }, true);
}

Taper Taper::custom(std::function<double(double)> fn, bool bounded_variation, std::string name) {
  if (!fn) throw InvalidTaperError("custom taper without a function");
  for (int i = 0; i <= kNonnegativityGrid; ++i) {
    const double t = static_cast<double>(i) / kNonnegativityGrid;
    const double v = fn(t);
    if (!std::isfinite(v) || v < 0.0)
      throw InvalidTaperError("custom taper '" + name + "' is negative or non-finite at t = " +
                              std::to_string(t));
  }
  return build(TaperId::custom, std::move(name), std::move(fn), bounded_variation);
}

Taper Taper::from_name(std::string_view name) {
  if (name == "rect" || name == "rectangular") return rectangular();
  if (name == "linear") return linear();
  if (name == "tukey" || name == "tukey_hanning") return tukey_hanning();
  throw InvalidTaperError("unknown taper '" + std::string(name) + "' (expected rect|linear|tukey)");
}

double Taper::operator()(double t) const {
  if (t < 0.0 || t > 1.0) return 0.0;
  return state_->fn(t);
}

double Taper::moment(int k) const {
  if (k < 1) throw DomainError("taper moment order must be >= 1");
  if (k <= kCachedMoments) return state_->moments[k - 1];
  return integrate_power(state_->fn, k);
}

std::vector<double> Taper::weights(std::size_t T) const {
  std::vector<double> w(T);
  const double inv = 1.0 / static_cast<double>(T);
  for (std::size_t t = 1; t <= T; ++t) w[t - 1] = (*this)(static_cast<double>(t) * inv);
  return w;
}

double taper_moment(const Taper& taper, int k) { return taper.moment(k); }

double tapering_factor(const Taper& taper) {
  const double h2 = taper.moment(2);
  if (!(h2 > 0.0)) throw InvalidTaperError("degenerate taper: H_2 = 0");
  return taper.moment(4) / (h2 * h2);
}

std::complex<double> dirichlet_kernel(const Taper& taper, int k, std::size_t T, double lambda) {
  if (T < 1) throw DomainError("dirichlet_kernel requires T >= 1");
  if (k < 1) throw DomainError("dirichlet_kernel requires k >= 1");
  std::complex<double> sum{0.0, 0.0};
  const double inv = 1.0 / static_cast<double>(T);
  for (std::size_t t = 1; t <= T; ++t) {
    const double w = std::pow(taper(static_cast<double>(t) * inv), k);
    const double phase = -lambda * static_cast<double>(t);
    sum += w * std::complex<double>(std::cos(phase), std::sin(phase));
  }
  return sum;
}

std::complex<double> fejer_kernel(const Taper& taper, int k, std::size_t T,
                                  std::span<const double> u) {
  if (k != 2 && k != 3)
    throw UnsupportedError("fejer_kernel supports arity 2 and 3 only, got " + std::to_string(k));
  if (u.size() != static_cast<std::size_t>(k - 1))
    throw ShapeError("fejer_kernel of arity k needs k - 1 frequencies");
  const double norm = dirichlet_kernel(taper, k, T, 0.0).real();
  if (!(norm != 0.0)) throw InvalidTaperError("H_{k,T}(0) = 0");
  std::complex<double> prod{1.0, 0.0};
  double total = 0.0;
  for (double uj : u) {
    prod *= dirichlet_kernel(taper, 1, T, uj);
    total += uj;
  }
  prod *= dirichlet_kernel(taper, 1, T, -total);
  return prod / (std::pow(2.0 * kPi, k - 1) * norm);
}

double fejer_kernel2(const Taper& taper, std::size_t T, double u) {
  const double norm = dirichlet_kernel(taper, 2, T, 0.0).real();
  if (!(norm > 0.0)) throw InvalidTaperError("H_{2,T}(0) = 0");
  return std::norm(dirichlet_kernel(taper, 1, T, u)) / (2.0 * kPi * norm);
}

std::vector<double> fejer_kernel2_on_grid(const Taper& taper, std::size_t T, std::size_t n) {
  if (n < T) throw SizeError("fejer grid must have at least T points");
  const auto h = taper.weights(T);
  double h2 = 0.0;
  std::vector<std::complex<double>> buf(n);
  for (std::size_t t = 1; t <= T; ++t) {
    buf[t % n] += h[t - 1];
    h2 += h[t - 1] * h[t - 1];
  }
  if (!(h2 > 0.0)) throw InvalidTaperError("H_{2,T}(0) = 0");
  detail::fft_forward(buf);
  std::vector<double> out(n);
  const std::size_t half = n / 2;
  for (std::size_t j = 0; j < n; ++j) {
    // u_j = 2 pi (j - n/2) / n  maps to FFT bin (j - n/2) mod n
    const std::size_t bin = (j + n - half) % n;
    out[j] = std::norm(buf[bin]) / (2.0 * kPi * h2);
  }
  return out;
}

}  // namespace taperspec
