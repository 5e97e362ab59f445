#include "taperspec/spectrum.hpp"

#include <cstdio>
#include <numbers>
#include <ostream>

#include "fft.hpp"
#include "taperspec/errors.hpp"

namespace taperspec {
namespace {

constexpr double kPi = std::numbers::pi;

Periodogram skeleton(std::span<const double> x, const Taper& taper, const FrequencyGrid& grid) {
  if (x.size() < 2) throw SizeError("periodogram requires T >= 2");
  Periodogram p;
  p.grid = grid;
  p.T = x.size();
  p.taper = taper.name();
  p.c_T = normalization_constant(taper, x.size());
  if (!(p.c_T > 0.0)) throw InvalidTaperError("C_T = 0 for taper '" + taper.name() + "'");
  p.values.resize(grid.size());
  return p;
}

}  // namespace

FrequencyGrid FrequencyGrid::custom(std::vector<double> points, std::vector<double> weights) {
  if (points.size() != weights.size()) throw ShapeError("grid points and weights differ in size");
  for (std::size_t j = 1; j < points.size(); ++j)
    if (!(points[j] > points[j - 1])) throw ShapeError("grid points must be strictly increasing");
  FrequencyGrid g;
  g.points = std::move(points);
  g.weights = std::move(weights);
  return g;
}

FrequencyGrid canonical_grid(std::size_t T, std::size_t oversample, bool shifted) {
  if (oversample != 1 && oversample != 2 && oversample != 4 && oversample != 8)
    throw DomainError("oversample must be 1, 2, 4 or 8");
  if (T < 1) throw SizeError("canonical_grid requires T >= 1");
  const std::size_t N = detail::next_pow2(oversample * T);
  FrequencyGrid g;
  g.fft_size = N;
  g.shifted = shifted;
  g.points.resize(N);
  g.weights.assign(N, 2.0 * kPi / static_cast<double>(N));
  const double delta = shifted ? 0.5 : 0.0;
  for (std::size_t j = 1; j <= N; ++j)
    g.points[j - 1] = -kPi + 2.0 * kPi * (static_cast<double>(j) - delta) / static_cast<double>(N);
  return g;
}

std::complex<double> tapered_dft(std::span<const double> x, const Taper& taper, double lambda) {
  const std::size_t T = x.size();
  const double inv = 1.0 / static_cast<double>(T);
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t t = 1; t <= T; ++t) {
    const double w = taper(static_cast<double>(t) * inv) * x[t - 1];
    acc += w * std::polar(1.0, -lambda * static_cast<double>(t));
  }
  return acc;
}

std::complex<double> tapered_dft(const TimeSeries& series, const Taper& taper, double lambda) {
  return tapered_dft(series.view(), taper, lambda);
}

double normalization_constant(const Taper& taper, std::size_t T) {
  double h2 = 0.0;
  for (double h : taper.weights(T)) h2 += h * h;
  return 2.0 * kPi * h2;
}

Periodogram kernels::periodogram_fft(std::span<const double> x, const Taper& taper,
                                     const FrequencyGrid& grid) {
  if (!grid.canonical()) throw ShapeError("periodogram_fft needs a canonical grid");
  Periodogram p = skeleton(x, taper, grid);
  const std::size_t T = x.size();
  const std::size_t N = grid.fft_size;
  const auto h = taper.weights(T);
  // e^{-i lambda_j t} = (-1)^t e^{2 pi i delta t / N} e^{-2 pi i j t / N}
  const double delta = grid.shifted ? 0.5 : 0.0;
  std::vector<std::complex<double>> buf(N);
  for (std::size_t t = 1; t <= T; ++t) {
    const double sign = (t % 2 == 0) ? 1.0 : -1.0;
    const double a = sign * h[t - 1] * x[t - 1];
    buf[t % N] += delta == 0.0 ? std::complex<double>(a, 0.0)
                               : a * std::polar(1.0, 2.0 * kPi * delta * static_cast<double>(t) /
                                                         static_cast<double>(N));
  }
  detail::fft_forward(buf);
  for (std::size_t j = 1; j <= N; ++j) p.values[j - 1] = std::norm(buf[j % N]) / p.c_T;
  return p;
}

Periodogram reference::periodogram_direct(std::span<const double> x, const Taper& taper,
                                          const FrequencyGrid& grid) {
  Periodogram p = skeleton(x, taper, grid);
  for (std::size_t j = 0; j < grid.size(); ++j)
    p.values[j] = std::norm(tapered_dft(x, taper, grid.points[j])) / p.c_T;
  return p;
}

Periodogram tapered_periodogram(std::span<const double> x, const Taper& taper,
                                const FrequencyGrid& grid) {
  return grid.canonical() ? kernels::periodogram_fft(x, taper, grid)
                          : reference::periodogram_direct(x, taper, grid);
}

Periodogram tapered_periodogram(const TimeSeries& series, const Taper& taper,
                                const FrequencyGrid& grid) {
  return tapered_periodogram(series.view(), taper, grid);
}

void write_periodogram_csv(const Periodogram& pgram, std::ostream& out) {
  out << "lambda,value\r\n";
  char buf[80];
  for (std::size_t j = 0; j < pgram.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\r\n", pgram.grid.points[j], pgram.values[j]);
    out << buf;
  }
}

}  // namespace taperspec
