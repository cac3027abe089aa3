#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace fiberalign {

inline std::size_t resolve_workers(std::size_t requested) {
  if (requested > 0) return requested;
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

// Runs fn(block) for every block in [0, n_blocks). Blocks are dealt to
// workers round-robin; callers write into per-block slots and reduce in block
// order afterwards, so results never depend on the worker count.
template <typename Fn>
void for_each_block(std::size_t n_blocks, std::size_t workers, Fn&& fn) {
  workers = std::min(resolve_workers(workers), n_blocks);
  if (workers <= 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) fn(b);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t b = w; b < n_blocks; b += workers) fn(b);
    });
  }
}

}  // namespace fiberalign
