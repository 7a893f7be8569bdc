#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace mfseg {

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Writes must be
/// disjoint per index; scheduling never influences results.
template <typename Fn>
void parallel_for(size_t n, int threads, Fn&& fn) {
    if (n == 0) return;
    if (threads <= 1 || n < 2) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const size_t grain = std::max<size_t>(1, n / (static_cast<size_t>(threads) * 8));
    std::atomic<size_t> cursor{0};
    auto worker = [&] {
        for (;;) {
            const size_t begin = cursor.fetch_add(grain);
            if (begin >= n) return;
            const size_t end = std::min(n, begin + grain);
            for (size_t i = begin; i < end; ++i) fn(i);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads) - 1);
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
}

/// Floating-point reduction that is bit-identical for every thread
/// count: the index range is cut into a fixed number of chunks, each
/// chunk is reduced sequentially, and the partials are merged in chunk
/// order.
template <typename Acc, typename Map, typename Merge>
Acc chunked_reduce(size_t n, int threads, Acc init, Map&& map_chunk, Merge&& merge) {
    constexpr size_t kChunks = 64;
    if (n == 0) return init;
    const size_t chunk = (n + kChunks - 1) / kChunks;
    const size_t used = (n + chunk - 1) / chunk;
    std::vector<Acc> partials(used, init);
    parallel_for(used, threads, [&](size_t c) {
        const size_t begin = c * chunk;
        const size_t end = std::min(n, begin + chunk);
        partials[c] = map_chunk(begin, end);
    });
    Acc acc = init;
    for (size_t c = 0; c < used; ++c) acc = merge(acc, partials[c]);
    return acc;
}

}  // namespace mfseg
