#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace midmarket {

// Runs fn(i) for i in [0,n) across worker threads. Callers write results into
// per-index slots, so output is independent of scheduling.
template <typename F>
void parallel_for(std::size_t n, F&& fn, unsigned threads = 0) {
    if (threads == 0) threads = std::thread::hardware_concurrency();
    if (threads == 0) threads = 1;
    if (n > 0 && static_cast<std::size_t>(threads) > n) threads = static_cast<unsigned>(n);
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    const std::size_t chunk = std::max<std::size_t>(1, n / (static_cast<std::size_t>(threads) * 8));
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t lo = next.fetch_add(chunk);
                if (lo >= n) return;
                std::size_t hi = std::min(n, lo + chunk);
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace midmarket
