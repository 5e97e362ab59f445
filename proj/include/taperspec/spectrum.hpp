#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "taperspec/models.hpp"
#include "taperspec/taper.hpp"

namespace taperspec {

/// Quadrature grid on (-pi, pi]. A canonical grid is the Fourier grid
/// lambda_j = -pi + 2 pi (j - delta) / N, j = 1..N, with delta = 1/2 when shifted
/// (no point at 0 or at +-pi) and delta = 0 otherwise; weights are 2 pi / N.
struct FrequencyGrid {
  std::vector<double> points;
  std::vector<double> weights;
  std::size_t fft_size = 0;  // N for canonical grids, 0 for arbitrary point sets
  bool shifted = false;

  std::size_t size() const noexcept { return points.size(); }
  bool canonical() const noexcept { return fft_size != 0; }

  /// Arbitrary grid; ShapeError when sizes differ or points are not increasing.
  static FrequencyGrid custom(std::vector<double> points, std::vector<double> weights);
};

/// N = smallest power of two >= oversample * T; oversample in {1, 2, 4, 8}.
FrequencyGrid canonical_grid(std::size_t T, std::size_t oversample = 4, bool shifted = false);

struct Periodogram {
  FrequencyGrid grid;
  std::vector<double> values;
  double c_T = 0.0;  // 2 pi sum_t h^2(t/T)
  std::string taper;
  std::size_t T = 0;

  std::size_t size() const noexcept { return values.size(); }
};

/// sum_{t=1}^T h(t/T) X(t) e^{-i lambda t}.
std::complex<double> tapered_dft(std::span<const double> x, const Taper& taper, double lambda);
std::complex<double> tapered_dft(const TimeSeries& series, const Taper& taper, double lambda);

/// 2 pi H_{2,T}(0) from the exact finite sum.
double normalization_constant(const Taper& taper, std::size_t T);

/// I(lambda) = |d(lambda)|^2 / C_T on `grid`; zero-padded FFT on canonical grids,
/// direct summation otherwise.
Periodogram tapered_periodogram(std::span<const double> x, const Taper& taper,
                                const FrequencyGrid& grid);
Periodogram tapered_periodogram(const TimeSeries& series, const Taper& taper,
                                const FrequencyGrid& grid);

/// CSV with header "lambda,value", 17 significant digits.
void write_periodogram_csv(const Periodogram& pgram, std::ostream& out);

namespace kernels {
/// FFT evaluation on a canonical grid.
Periodogram periodogram_fft(std::span<const double> x, const Taper& taper,
                            const FrequencyGrid& grid);
}  // namespace kernels

namespace reference {
/// O(N T) direct summation on any grid, parallel-free; the oracle for the FFT path.
Periodogram periodogram_direct(std::span<const double> x, const Taper& taper,
                               const FrequencyGrid& grid);
}  // namespace reference

}  // namespace taperspec
