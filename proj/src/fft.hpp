#pragma once

#include <complex>
#include <vector>

namespace taperspec::detail {

/// In-place forward DFT, X[k] = sum_n x[n] exp(-2 pi i k n / N). Any length; plans are
/// cached per length and shared across threads.
void fft_forward(std::vector<std::complex<double>>& data);

/// Unnormalized inverse, x[n] = sum_k X[k] exp(+2 pi i k n / N).
void fft_backward(std::vector<std::complex<double>>& data);

/// Smallest power of two >= n.
std::size_t next_pow2(std::size_t n);

}  // namespace taperspec::detail
