#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <type_traits>
#include <vector>

#include "taperspec/rng.hpp"

namespace taperspec {

// Replication r always sees seed derive_seed(master, r) and writes slot r, so results do
// not depend on the number of threads. Reductions happen afterwards in index order.

namespace kernels {

template <class F>
auto replicate(std::size_t reps, std::uint64_t master, F&& fn)
    -> std::vector<std::invoke_result_t<F&, std::size_t, std::uint64_t>> {
  using R = std::invoke_result_t<F&, std::size_t, std::uint64_t>;
  std::vector<R> out(reps);
  std::exception_ptr err;
  const auto n = static_cast<long long>(reps);
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(i);
    try {
      out[r] = fn(r, derive_seed(master, r));
    } catch (...) {
#pragma omp critical(taperspec_replicate_error)
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  return out;
}

}  // namespace kernels

namespace reference {

template <class F>
auto replicate(std::size_t reps, std::uint64_t master, F&& fn)
    -> std::vector<std::invoke_result_t<F&, std::size_t, std::uint64_t>> {
  std::vector<std::invoke_result_t<F&, std::size_t, std::uint64_t>> out(reps);
  for (std::size_t r = 0; r < reps; ++r) out[r] = fn(r, derive_seed(master, r));
  return out;
}

}  // namespace reference

}  // namespace taperspec
