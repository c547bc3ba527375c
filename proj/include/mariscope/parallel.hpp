#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace mariscope {

/// Static-partition parallel loop over [begin, end). Chunks are contiguous and
/// the body writes only into its own range, so the result is identical for any
/// thread count.
template <typename Fn>
void parallel_for(std::size_t begin, std::size_t end, int threads, Fn&& body) {
    const std::size_t total = end > begin ? end - begin : 0;
    if (total == 0) return;
    const std::size_t want = threads < 1 ? 1 : static_cast<std::size_t>(threads);
    const std::size_t n = std::min(want, total);
    if (n <= 1) {
        body(begin, end);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(n);
    const std::size_t chunk = (total + n - 1) / n;
    for (std::size_t t = 0; t < n; ++t) {
        const std::size_t lo = begin + t * chunk;
        const std::size_t hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&body, lo, hi] { body(lo, hi); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace mariscope
