#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace sgrd {

/// Runs body(i) for i in [0, n) on up to `workers` threads. Each index runs
/// exactly once; results must be written by index so the outcome does not
/// depend on scheduling. The first exception (lowest index) is rethrown.
template <class Body>
void parallel_for(std::size_t n, int workers, Body&& body) {
    const std::size_t w = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
    if (w <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::exception_ptr first;
    std::size_t first_index = n;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (i < first_index) {
                    first_index = i;
                    first = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (std::size_t t = 0; t < w; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first) std::rethrow_exception(first);
}

}  // namespace sgrd
