#pragma once

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace levylab {

// Worker cap: LEVYLAB_THREADS if set and positive, else hardware concurrency.
inline std::size_t worker_count() {
  if (const char* env = std::getenv("LEVYLAB_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<std::size_t>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Samples are processed in fixed blocks and block results are merged in block
// order, so reductions (including floating-point sums) do not depend on how
// many workers ran.
inline constexpr std::size_t kParallelBlock = 1024;

// block(first, last) -> R computed sequentially inside one block;
// merge(acc, r) folds block results in increasing block order.  A smaller
// block_size trades scheduling overhead for finer work distribution (e.g. one
// restart per block); it never affects results.
template <typename R, typename BlockFn, typename MergeFn>
R parallel_map_reduce(std::size_t count, R init, BlockFn&& block, MergeFn&& merge,
                      std::size_t block_size = kParallelBlock) {
  if (count == 0) return init;
  const std::size_t n_blocks = (count + block_size - 1) / block_size;
  std::vector<R> results(n_blocks, init);
  const std::size_t workers = std::min(worker_count(), n_blocks);
  if (workers <= 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) {
      const std::size_t first = b * block_size;
      const std::size_t last = std::min(count, first + block_size);
      results[b] = block(first, last);
    }
  } else {
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (;;) {
        const std::size_t b = next.fetch_add(1);
        if (b >= n_blocks) return;
        const std::size_t first = b * block_size;
        const std::size_t last = std::min(count, first + block_size);
        results[b] = block(first, last);
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  R acc = init;
  for (std::size_t b = 0; b < n_blocks; ++b) acc = merge(acc, results[b]);
  return acc;
}

// f(index) -> bool; returns the number of indices where f holds.
template <typename F>
std::size_t parallel_count(std::size_t count, F&& f) {
  return parallel_map_reduce<std::size_t>(
      count, 0,
      [&](std::size_t first, std::size_t last) {
        std::size_t hits = 0;
        for (std::size_t i = first; i < last; ++i)
          if (f(i)) ++hits;
        return hits;
      },
      [](std::size_t a, std::size_t b) { return a + b; });
}

// f(index) -> double; blockwise-deterministic sum.
template <typename F>
double parallel_sum(std::size_t count, F&& f) {
  return parallel_map_reduce<double>(
      count, 0.0,
      [&](std::size_t first, std::size_t last) {
        double s = 0.0;
        for (std::size_t i = first; i < last; ++i) s += f(i);
        return s;
      },
      [](double a, double b) { return a + b; });
}

// f(index) -> void with index-addressed output storage.
template <typename F>
void parallel_for(std::size_t count, F&& f) {
  parallel_map_reduce<int>(
      count, 0,
      [&](std::size_t first, std::size_t last) {
        for (std::size_t i = first; i < last; ++i) f(i);
        return 0;
      },
      [](int, int) { return 0; });
}

}  // namespace levylab
