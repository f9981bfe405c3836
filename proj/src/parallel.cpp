#include "malab/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace malab {

namespace {

std::atomic<unsigned> g_threads{0};

} // namespace

void set_thread_count(unsigned count) { g_threads = count; }

unsigned thread_count()
{
  const unsigned t = g_threads;
  if (t > 0) return t;
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body)
{
  const std::size_t workers = std::min<std::size_t>(thread_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::size_t> failed_at(workers, n);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      const std::size_t lo = n * w / workers, hi = n * (w + 1) / workers;
      for (std::size_t i = lo; i < hi; ++i) {
        try {
          body(i);
        } catch (...) {
          errors[w] = std::current_exception();
          failed_at[w] = i;
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  std::size_t first = workers;
  for (std::size_t w = 0; w < workers; ++w)
    if (errors[w] && (first == workers || failed_at[w] < failed_at[first])) first = w;
  if (first < workers) std::rethrow_exception(errors[first]);
}

} // namespace malab
