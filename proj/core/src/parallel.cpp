#include "sdvar/parallel.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace sdvar {

std::vector<BlockRange> partition_blocks(int total, int block_size) {
  std::vector<BlockRange> blocks;
  int index = 0;
  for (int begin = 0; begin < total; begin += block_size) {
    blocks.push_back({begin, std::min(begin + block_size, total), index});
    ++index;
  }
  return blocks;
}

void run_blocks(const std::vector<BlockRange>& blocks, int workers,
                const std::function<void(const BlockRange&)>& body) {
  if (blocks.empty()) return;
  workers = std::max(1, std::min<int>(workers, static_cast<int>(blocks.size())));
  if (workers == 1) {
    for (const auto& b : blocks) body(b);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= blocks.size()) return;
      try {
        body(blocks[i]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

int default_workers() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

}  // namespace sdvar
