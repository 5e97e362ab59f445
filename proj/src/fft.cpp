#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace taperspec::detail {
namespace {

struct PlanCache {
  std::mutex mutex;
  std::map<int, fftw_plan> plans;

  ~PlanCache() {
    for (auto& [n, plan] : plans) fftw_destroy_plan(plan);
  }

  fftw_plan get(int n) {
    std::lock_guard lock(mutex);
    if (auto it = plans.find(n); it != plans.end()) return it->second;
    // Planner calls are not thread-safe; execution with the new-array interface is.
    auto* scratch = fftw_alloc_complex(static_cast<std::size_t>(n));
    fftw_plan plan =
        fftw_plan_dft_1d(n, scratch, scratch, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(scratch);
    plans.emplace(n, plan);
    return plan;
  }
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

}  // namespace

void fft_forward(std::vector<std::complex<double>>& data) {
  if (data.size() <= 1) return;
  const fftw_plan plan = cache().get(static_cast<int>(data.size()));
  auto* buffer = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, buffer, buffer);
}

void fft_backward(std::vector<std::complex<double>>& data) {
  for (auto& z : data) z = std::conj(z);
  fft_forward(data);
  for (auto& z : data) z = std::conj(z);
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace taperspec::detail
