#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace fishrect::detail {

/// Runs fn(row) for row in [0, rows) over up to `threads` workers. Each row
/// is processed exactly once by one worker, so results do not depend on the
/// thread count.
template <typename Fn>
void parallel_rows(int rows, int threads, Fn&& fn) {
  const int workers = std::clamp(threads, 1, std::max(rows, 1));
  if (workers == 1) {
    for (int r = 0; r < rows; ++r) fn(r);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int r = w; r < rows; r += workers) fn(r);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace fishrect::detail
