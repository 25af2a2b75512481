#pragma once

#include <cstddef>
#include <functional>

namespace ppd {

/// Resolves a user-facing worker count: 0 means "all hardware threads".
unsigned resolve_jobs(unsigned jobs);

/// Runs `fn(block_index, begin, end)` for every block of `block_size`
/// consecutive indices in [0, n). Blocks are handed to up to `jobs` workers;
/// the calling thread participates. Exceptions thrown by `fn` are rethrown
/// on the calling thread (first one wins).
void parallel_blocks(std::size_t n, std::size_t block_size, unsigned jobs,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

inline std::size_t block_count(std::size_t n, std::size_t block_size) {
  return (n + block_size - 1) / block_size;
}

}  // namespace ppd
