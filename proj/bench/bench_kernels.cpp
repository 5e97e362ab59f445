// OpenMP kernels against their serial references.

#include <benchmark/benchmark.h>

#include <vector>

#include "taperspec/functionals.hpp"
#include "taperspec/models.hpp"
#include "taperspec/replicate.hpp"
#include "taperspec/spectrum.hpp"
#include "taperspec/whittle.hpp"

using namespace taperspec;

namespace {

std::vector<double> series(std::size_t T) { return simulate(SpectralModel::ar1(0.5), NoiseDriver(), T, 1).values; }

void BM_LaggedProductsKernel(benchmark::State& st) {
  const auto y = series(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(kernels::lagged_products(y, y.size() / 4));
}

void BM_LaggedProductsReference(benchmark::State& st) {
  const auto y = series(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(reference::lagged_products(y, y.size() / 4));
}

void BM_QuadraticFormKernel(benchmark::State& st) {
  const auto x = series(static_cast<std::size_t>(st.range(0)));
  const auto h = Taper::tukey_hanning();
  const auto g = GeneratingFunction::indicator(1.0);
  for (auto _ : st) benchmark::DoNotOptimize(quadratic_form(x, h, g));
}

void BM_QuadraticFormDirect(benchmark::State& st) {
  const auto x = series(static_cast<std::size_t>(st.range(0)));
  const auto h = Taper::tukey_hanning();
  const auto g = GeneratingFunction::indicator(1.0);
  for (auto _ : st) benchmark::DoNotOptimize(reference::quadratic_form_direct(x, h, g));
}

void BM_PeriodogramFft(benchmark::State& st) {
  const auto x = series(static_cast<std::size_t>(st.range(0)));
  const auto grid = canonical_grid(x.size(), 2);
  const auto h = Taper::tukey_hanning();
  for (auto _ : st) benchmark::DoNotOptimize(kernels::periodogram_fft(x, h, grid));
}

void BM_PeriodogramDirect(benchmark::State& st) {
  const auto x = series(static_cast<std::size_t>(st.range(0)));
  const auto grid = canonical_grid(x.size(), 2);
  const auto h = Taper::tukey_hanning();
  for (auto _ : st) benchmark::DoNotOptimize(reference::periodogram_direct(x, h, grid));
}

auto whittle_rep(std::size_t T) {
  return [T](std::size_t, std::uint64_t seed) {
    const auto x = simulate(SpectralModel::ar1(0.5), NoiseDriver(), T, seed);
    return whittle_estimate(x, Taper::tukey_hanning(), SpectralModel::ar1(0.5)).theta_hat[0];
  };
}

void BM_ReplicateKernel(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(kernels::replicate(64, 1, whittle_rep(st.range(0))));
}

void BM_ReplicateReference(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(reference::replicate(64, 1, whittle_rep(st.range(0))));
}

}  // namespace

BENCHMARK(BM_LaggedProductsKernel)->Arg(1024)->Arg(8192);
BENCHMARK(BM_LaggedProductsReference)->Arg(1024)->Arg(8192);
BENCHMARK(BM_QuadraticFormKernel)->Arg(256)->Arg(1024);
BENCHMARK(BM_QuadraticFormDirect)->Arg(256)->Arg(1024);
BENCHMARK(BM_PeriodogramFft)->Arg(256)->Arg(2048);
BENCHMARK(BM_PeriodogramDirect)->Arg(256)->Arg(2048);
BENCHMARK(BM_ReplicateKernel)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReplicateReference)->Arg(1024)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
