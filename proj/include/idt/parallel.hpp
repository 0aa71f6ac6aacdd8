#pragma once

#include <cstddef>
#include <functional>

namespace idt::parallel {

/// Worker count for all parallel loops; 0 selects hardware concurrency.
void set_threads(std::size_t k) noexcept;
std::size_t threads() noexcept;

/// Splits [0, n) into contiguous chunks and runs `body(begin, end)` on each.
/// If chunks throw, the exception of the lowest-indexed chunk is rethrown,
/// so failures are reported identically for any worker count. Calls made
/// from inside a worker run inline on that worker.
void for_ranges(std::size_t n,
                const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace idt::parallel
