#ifndef WICKMART_PARALLEL_HPP
#define WICKMART_PARALLEL_HPP

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace wickmart {

int default_threads();
void set_default_threads(int n);

// Splits [0, n_items) into fixed-size chunks and lets worker threads pull
// chunks from a shared counter. Chunk boundaries do not depend on the thread
// count, so per-chunk results merged in chunk order are identical for any
// --threads value.
inline void parallel_chunks(std::size_t n_items, std::size_t chunk_size, int n_threads,
                            const std::function<void(std::size_t chunk_idx, std::size_t begin,
                                                     std::size_t end)>& fn) {
  if (n_items == 0) return;
  if (chunk_size == 0) chunk_size = 1;
  const std::size_t n_chunks = (n_items + chunk_size - 1) / chunk_size;
  if (n_threads <= 1 || n_chunks == 1) {
    for (std::size_t c = 0; c < n_chunks; ++c)
      fn(c, c * chunk_size, std::min(n_items, (c + 1) * chunk_size));
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      fn(c, c * chunk_size, std::min(n_items, (c + 1) * chunk_size));
    }
  };
  std::vector<std::thread> pool;
  const std::size_t use = std::min<std::size_t>(static_cast<std::size_t>(n_threads), n_chunks);
  pool.reserve(use);
  for (std::size_t i = 0; i < use; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

inline std::size_t n_chunks_for(std::size_t n_items, std::size_t chunk_size) {
  if (chunk_size == 0) chunk_size = 1;
  return n_items == 0 ? 0 : (n_items + chunk_size - 1) / chunk_size;
}

}  // namespace wickmart

#endif
