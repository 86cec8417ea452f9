#pragma once

#include <functional>
#include <vector>

namespace sdvar {

struct BlockRange {
  int begin, end, index;
};

// Fixed-size blocks so per-block seeds, and therefore results, do not depend
// on the worker count.
std::vector<BlockRange> partition_blocks(int total, int block_size);

// Runs blocks on up to `workers` threads; callers reduce per-block results in
// block order afterwards.
void run_blocks(const std::vector<BlockRange>& blocks, int workers,
                const std::function<void(const BlockRange&)>& body);

int default_workers();

}  // namespace sdvar
