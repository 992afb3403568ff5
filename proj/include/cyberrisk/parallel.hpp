#pragma once

#include <cstddef>
#include <functional>

namespace cyberrisk {

/// Worker count used by block-parallel loops (0 = hardware concurrency).
void set_thread_count(std::size_t threads);
std::size_t thread_count();

/// Run body(block) for block in [0, blocks). Blocks must write only to
/// block-owned storage; the partition never depends on the thread count, so
/// results are identical for any setting.
void parallel_for_blocks(std::size_t blocks, const std::function<void(std::size_t)>& body);

/// Fixed block size for scenario-level work.
inline constexpr std::size_t kScenarioBlock = 4096;

inline std::size_t block_count(std::size_t items, std::size_t block = kScenarioBlock)
{
    return (items + block - 1) / block;
}

}  // namespace cyberrisk
