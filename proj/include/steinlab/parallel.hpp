#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace steinlab {

// Kahan compensated accumulator.
struct KahanSum {
    double s = 0.0, c = 0.0;
    void add(double x) {
        const double y = x - c;
        const double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    double value() const { return s; }
};

// Runs fn(begin, end) over fixed-size chunks of [0, total) on `workers`
// threads. Chunk boundaries do not depend on the worker count, so per-chunk
// results (written into disjoint slots by the caller) merge deterministically.
inline void parallel_chunks(std::size_t total, std::size_t chunk_size, int workers,
                            const std::function<void(std::size_t, std::size_t)>& fn) {
    if (total == 0) return;
    if (chunk_size == 0) chunk_size = 1;
    const std::size_t n_chunks = (total + chunk_size - 1) / chunk_size;
    if (workers <= 1 || n_chunks == 1) {
        for (std::size_t cidx = 0; cidx < n_chunks; ++cidx) {
            const std::size_t b = cidx * chunk_size;
            fn(b, std::min(total, b + chunk_size));
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (;;) {
            const std::size_t cidx = next.fetch_add(1);
            if (cidx >= n_chunks) return;
            const std::size_t b = cidx * chunk_size;
            fn(b, std::min(total, b + chunk_size));
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
}

inline int default_workers() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc > 8 ? 8 : hc);
}

} // namespace steinlab
