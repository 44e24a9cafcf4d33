#pragma once

#include <cstddef>
#include <functional>

namespace isochr::detail {

/// Splits [0, n) into `workers` contiguous chunks and runs fn(begin, end,
/// chunk) on each, one thread per chunk. workers <= 1 runs inline.
/// Chunk boundaries depend only on n and workers.
void parallel_chunks(std::size_t n, unsigned workers,
                     const std::function<void(std::size_t, std::size_t, unsigned)>& fn);

unsigned clamp_workers(unsigned workers, std::size_t n) noexcept;

}  // namespace isochr::detail
