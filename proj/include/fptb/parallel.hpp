#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fptb {

namespace detail {
inline std::atomic<unsigned>& worker_override() {
  static std::atomic<unsigned> value{0};
  return value;
}
}  // namespace detail

// 0 means "use hardware concurrency".  Results never depend on this value;
// it only sets how many threads pull blocks of work.
inline void set_workers(unsigned n) { detail::worker_override().store(n); }

inline unsigned workers() {
  const unsigned w = detail::worker_override().load();
  if (w != 0) return w;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw != 0 ? hw : 1;
}

// Runs fn(block_index) for block_index in [0, n_blocks).  Blocks are handed
// out dynamically, so callers must write results into per-block slots and
// reduce in block order afterwards.
template <class Fn>
void parallel_blocks(std::uint64_t n_blocks, Fn&& fn) {
  const unsigned n_threads =
      static_cast<unsigned>(std::min<std::uint64_t>(workers(), n_blocks));
  if (n_threads <= 1) {
    for (std::uint64_t b = 0; b < n_blocks; ++b) fn(b);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    try {
      for (;;) {
        const std::uint64_t b = next.fetch_add(1);
        if (b >= n_blocks) break;
        fn(b);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
      next.store(n_blocks);  // drain remaining work
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace fptb
