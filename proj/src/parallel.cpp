#include "kktscope/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace kktscope {

std::size_t thread_limit() {
  if (const char* env = std::getenv("KKT_SCOPE_THREADS")) {
    try {
      const long value = std::stol(env);
      if (value > 0) return static_cast<std::size_t>(value);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min(thread_limit(), count);
  std::mutex mutex;
  std::size_t failed_index = count;
  std::exception_ptr failure;

  auto run = [&](std::size_t i) {
    try {
      body(i);
    } catch (...) {
      std::lock_guard lock(mutex);
      if (i < failed_index) {
        failed_index = i;
        failure = std::current_exception();
      }
    }
  };

  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) run(i);
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace kktscope
