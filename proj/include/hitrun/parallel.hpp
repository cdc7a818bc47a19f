#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hitrun {

enum class Execution { serial, parallel };

/// Replica ensembles are cut into fixed-size blocks. Every block owns its
/// accumulators and the caller reduces them in block order, so the result
/// does not depend on how many workers ran the blocks.
struct ParallelOptions {
  Execution execution = Execution::parallel;
  int workers = 0; // 0: OpenMP default
  std::size_t block_size = 256;
};

inline std::size_t block_count(std::size_t items, std::size_t block_size) {
  return block_size == 0 ? 0 : (items + block_size - 1) / block_size;
}

inline int effective_workers(const ParallelOptions &options) {
#ifdef _OPENMP
  if (options.execution == Execution::serial)
    return 1;
  return options.workers > 0 ? options.workers : omp_get_max_threads();
#else
  (void)options;
  return 1;
#endif
}

/// Runs fn(block_index) for every block. Exceptions thrown inside a worker
/// are captured and the first one is rethrown after the loop.
template <class Fn>
void for_each_block(std::size_t n_blocks, const ParallelOptions &options,
                    Fn &&fn) {
  if (options.execution == Execution::serial) {
    for (std::size_t b = 0; b < n_blocks; ++b)
      fn(b);
    return;
  }

  std::exception_ptr error;
  std::mutex error_mutex;
  const int workers = effective_workers(options);
  const auto n = static_cast<long long>(n_blocks);
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (long long b = 0; b < n; ++b) {
    try {
      fn(static_cast<std::size_t>(b));
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error)
        error = std::current_exception();
    }
  }
  if (error)
    std::rethrow_exception(error);
}

} // namespace hitrun
