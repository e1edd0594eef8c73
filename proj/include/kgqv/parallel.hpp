#pragma once

// Replication orchestration: a fixed number of indexed tasks spread over
// worker threads, each with private state. Results are stored per index, so
// any reduction the caller performs afterwards is independent of scheduling.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace kgqv {

inline int default_jobs() noexcept {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

/// Run body(state, index) for index in [0, count). `make_state()` is called
/// once per worker. The first exception thrown by any task is rethrown.
template <typename MakeState, typename Body>
void parallel_for(std::size_t count, int jobs, MakeState&& make_state, Body&& body) {
  if (count == 0) return;
  const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(jobs, 1)));
  if (workers == 1) {
    auto state = make_state();
    for (std::size_t k = 0; k < count; ++k) body(state, k);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    try {
      auto state = make_state();
      for (std::size_t k = next.fetch_add(1); k < count && !failed.load(); k = next.fetch_add(1)) body(state, k);
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
      failed.store(true);
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

/// Collect fn(state, index) for every index into a vector ordered by index.
template <typename T, typename MakeState, typename Fn>
std::vector<T> replicate(std::size_t count, int jobs, MakeState&& make_state, Fn&& fn) {
  std::vector<T> out(count);
  parallel_for(count, jobs, make_state, [&](auto& state, std::size_t k) { out[k] = fn(state, k); });
  return out;
}

}  // namespace kgqv
