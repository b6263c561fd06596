#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <thread>
#include <vector>

namespace atlantis::core {

/// Runs work(0..n) on up to `jobs` threads and delivers results through
/// emit(i, result) strictly in index order, as prefixes complete. Work must
/// not throw; wrap failures into the result type.
template <typename Result>
void ordered_parallel_for(size_t n, int jobs,
                          const std::function<Result(size_t)>& work,
                          const std::function<void(size_t, Result&)>& emit) {
  if (n == 0) return;
  if (jobs <= 1) {
    for (size_t i = 0; i < n; ++i) {
      Result r = work(i);
      emit(i, r);
    }
    return;
  }

  std::mutex mu;
  std::map<size_t, Result> done;
  size_t next_claim = 0;
  size_t next_emit = 0;

  const auto worker = [&] {
    for (;;) {
      size_t idx;
      {
        std::lock_guard lock(mu);
        if (next_claim >= n) return;
        idx = next_claim++;
      }
      Result r = work(idx);
      std::unique_lock lock(mu);
      done.emplace(idx, std::move(r));
      while (!done.empty() && done.begin()->first == next_emit) {
        auto node = done.extract(done.begin());
        const size_t i = node.key();
        Result value = std::move(node.mapped());
        lock.unlock();
        emit(i, value);
        lock.lock();
        ++next_emit;
      }
    }
  };

  std::vector<std::thread> pool;
  const int count = std::min<int>(jobs, static_cast<int>(n));
  pool.reserve(static_cast<size_t>(count));
  for (int t = 0; t < count; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

}  // namespace atlantis::core
