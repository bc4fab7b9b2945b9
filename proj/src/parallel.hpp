#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <thread>
#include <vector>

namespace ttwopt {

/// Worker count for elementwise kernels: TT_THREADS if set (values < 1 mean
/// 1), otherwise hardware concurrency.
inline int thread_count() {
    if (const char* env = std::getenv("TT_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        return v < 1 ? 1 : static_cast<int>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(lo, hi) over a contiguous partition of [0, n). Chunk boundaries
/// depend only on n and the worker count, and workers write disjoint ranges,
/// so elementwise kernels produce bit-identical results at any thread count.
template <typename Fn>
void parallel_for(std::int64_t n, Fn&& fn) {
    static const int workers = thread_count();
    constexpr std::int64_t kMinPerThread = 1 << 15;
    const int used = static_cast<int>(std::min<std::int64_t>(workers, std::max<std::int64_t>(1, n / kMinPerThread)));
    if (used <= 1) {
        fn(std::int64_t{0}, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(used));
    const std::int64_t chunk = (n + used - 1) / used;
    for (int w = 0; w < used; ++w) {
        const std::int64_t lo = w * chunk;
        const std::int64_t hi = std::min<std::int64_t>(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace ttwopt
