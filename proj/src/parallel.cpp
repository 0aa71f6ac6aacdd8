#include "idt/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace idt::parallel {

namespace {
std::atomic<std::size_t> g_threads{0};
// Set inside worker threads: nested loops run inline instead of spawning.
thread_local bool t_in_worker = false;
}

void set_threads(std::size_t k) noexcept { g_threads.store(k); }

std::size_t threads() noexcept {
  const std::size_t k = g_threads.load();
  if (k > 0) return k;
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void for_ranges(std::size_t n,
                const std::function<void(std::size_t, std::size_t)>& body) {
  if (n == 0) return;
  const std::size_t workers = t_in_worker ? 1 : std::min(threads(), n);
  if (workers == 1) {
    body(0, n);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = n * w / workers;
      const std::size_t end = n * (w + 1) / workers;
      pool.emplace_back([&, w, begin, end] {
        t_in_worker = true;
        try {
          body(begin, end);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace idt::parallel
