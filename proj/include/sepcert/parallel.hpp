#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

namespace sepcert {

/// Execution policy for the sampling/propagation kernels. `serial` is the
/// reference loop; `parallel` distributes the same independent iterations
/// over OpenMP threads and must produce identical results.
enum class ExecPolicy { serial, parallel };

/// Runs body(i) for i in [0, count). Iterations must be independent and
/// write only to slot i of their outputs. The first exception thrown by any
/// iteration is rethrown after the loop.
template <class Body>
void for_each_index(ExecPolicy policy, std::size_t count, Body&& body) {
  if (policy == ExecPolicy::serial) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const long n = static_cast<long>(count);
#pragma omp parallel for schedule(dynamic, 4)
  for (long i = 0; i < n; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace sepcert
