#pragma once

#include <algorithm>
#include <cstdint>
#include <thread>
#include <vector>

namespace dmtz {

// Number of worker threads from DMTZ_THREADS (0 or unset = hardware concurrency).
int threads_from_env();

// Runs body(begin, end) over disjoint chunks of [0, n). threads <= 1 runs inline.
template <typename Body>
void parallel_for(std::int64_t n, int threads, Body&& body) {
    if (threads <= 1 || n < 4096) {
        body(std::int64_t{0}, n);
        return;
    }
    const std::int64_t chunks = std::min<std::int64_t>(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(chunks));
    for (std::int64_t c = 0; c < chunks; ++c) {
        const std::int64_t lo = n * c / chunks;
        const std::int64_t hi = n * (c + 1) / chunks;
        pool.emplace_back([&body, lo, hi] { body(lo, hi); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace dmtz
