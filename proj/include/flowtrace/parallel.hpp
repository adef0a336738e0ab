#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace flowtrace {

/// Pairwise (tree) summation. Deterministic for a fixed input ordering.
inline double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 8) {
    double s = 0;
    for (double x : xs) s += x;
    return s;
  }
  size_t h = xs.size() / 2;
  return pairwise_sum(xs.first(h)) + pairwise_sum(xs.subspan(h));
}

namespace detail {
inline int worker_count() {
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}
}  // namespace detail

/// Runs fn(chunk_index, begin, end) over [0, count) split into a fixed number
/// of chunks. Chunk boundaries depend only on count, never on the thread
/// count, so per-chunk results combine deterministically.
inline void for_chunks(std::int64_t count, int chunks,
                       const std::function<void(int, std::int64_t, std::int64_t)>& fn) {
  if (count <= 0) return;
  if (chunks > count) chunks = static_cast<int>(count);
  int workers = std::min(detail::worker_count(), chunks);

  auto run_chunk = [&](int c) {
    std::int64_t begin = count * c / chunks;
    std::int64_t end = count * (c + 1) / chunks;
    fn(c, begin, end);
  };

  if (workers <= 1) {
    for (int c = 0; c < chunks; ++c) run_chunk(c);
    return;
  }

  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      int c = next.fetch_add(1);
      if (c >= chunks) return;
      try {
        run_chunk(c);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

inline constexpr int kSumChunks = 64;

/// Deterministic parallel sum of term(i) for i in [0, count): each fixed chunk
/// is pairwise-summed, then chunk totals are pairwise-summed in index order.
inline double parallel_sum(std::int64_t count,
                           const std::function<double(std::int64_t)>& term) {
  if (count <= 0) return 0.0;
  int chunks = kSumChunks;
  if (chunks > count) chunks = static_cast<int>(count);
  std::vector<double> partial(static_cast<size_t>(chunks), 0.0);
  for_chunks(count, chunks, [&](int c, std::int64_t begin, std::int64_t end) {
    std::vector<double> vals;
    vals.reserve(static_cast<size_t>(end - begin));
    for (std::int64_t i = begin; i < end; ++i) vals.push_back(term(i));
    partial[static_cast<size_t>(c)] = pairwise_sum(vals);
  });
  return pairwise_sum(partial);
}

}  // namespace flowtrace
