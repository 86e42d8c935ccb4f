#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace aflab {

/// Runs fn(0) .. fn(nblocks-1), possibly across `threads` workers. Each block
/// owns its output slot, so results do not depend on scheduling.
inline void parallel_blocks(long nblocks, int threads, const std::function<void(long)>& fn) {
    if (threads <= 1 || nblocks <= 1) {
        for (long b = 0; b < nblocks; ++b) fn(b);
        return;
    }
    std::atomic<long> next{0};
    std::vector<std::thread> pool;
    const int nw = static_cast<int>(std::min<long>(threads, nblocks));
    pool.reserve(nw);
    for (int t = 0; t < nw; ++t)
        pool.emplace_back([&] {
            for (long b = next.fetch_add(1); b < nblocks; b = next.fetch_add(1)) fn(b);
        });
    for (auto& th : pool) th.join();
}

}  // namespace aflab
