#pragma once

// Deterministic path-parallel reduction.
//
// Items are grouped into fixed-size chunks; each chunk is reduced
// sequentially into its own accumulator and the chunk accumulators are merged
// in chunk order. Chunk boundaries do not depend on the worker count, so the
// result is bitwise identical for any number of threads.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace compactlab {

struct Execution {
  unsigned threads = 1;  ///< 0 = hardware concurrency
  std::size_t chunk = 256;

  unsigned resolved_threads() const noexcept {
    if (threads != 0) return threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
  }
};

/// `body(i, acc)` folds item i into `acc`; Acc needs default construction and
/// `merge(const Acc&)`.
template <class Acc, class Body>
Acc chunked_reduce(std::size_t n_items, const Execution& exec, Body&& body) {
  const std::size_t chunk = std::max<std::size_t>(exec.chunk, 1);
  const std::size_t n_chunks = (n_items + chunk - 1) / chunk;
  std::vector<Acc> partial(n_chunks);
  auto run_chunk = [&](std::size_t c) {
    const std::size_t lo = c * chunk;
    const std::size_t hi = std::min(n_items, lo + chunk);
    for (std::size_t i = lo; i < hi; ++i) body(i, partial[c]);
  };

  const unsigned workers = std::min<std::size_t>(exec.resolved_threads(), std::max<std::size_t>(n_chunks, 1));
  if (workers <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        try {
          for (std::size_t c = next++; c < n_chunks; c = next++) run_chunk(c);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = n_chunks;
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  Acc total{};
  for (const auto& p : partial) total.merge(p);
  return total;
}

}  // namespace compactlab
