#include "parallel.hpp"

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace isochr::detail {

unsigned clamp_workers(unsigned workers, std::size_t n) noexcept {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  if (n < workers) workers = static_cast<unsigned>(std::max<std::size_t>(n, 1));
  return workers;
}

void parallel_chunks(std::size_t n, unsigned workers,
                     const std::function<void(std::size_t, std::size_t, unsigned)>& fn) {
  workers = clamp_workers(workers, n);
  if (workers <= 1) {
    fn(0, n, 0);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = n * w / workers;
    const std::size_t end = n * (w + 1) / workers;
    threads.emplace_back([&, begin, end, w] {
      try {
        fn(begin, end, w);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace isochr::detail
