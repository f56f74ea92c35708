#pragma once

#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace wavecore {

/// requested > 0 wins; otherwise WAVECORE_THREADS; otherwise hardware concurrency.
inline int resolve_threads(int requested) {
    if (requested > 0) {
        return requested;
    }
    if (const char* env = std::getenv("WAVECORE_THREADS")) {
        try {
            const int v = std::stoi(env);
            if (v > 0) {
                return v;
            }
        } catch (const std::exception&) {
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Static-chunked loop over [0, n). Each index is visited exactly once, so
/// writes into per-index slots are deterministic regardless of thread count.
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    const auto workers = static_cast<std::size_t>(resolve_threads(threads));
    if (workers <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::exception_ptr first;
    std::mutex guard;
    std::vector<std::thread> pool;
    const std::size_t count = std::min(workers, n);
    pool.reserve(count);
    for (std::size_t t = 0; t < count; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = t; i < n; i += count) {
                    fn(i);
                }
            } catch (...) {
                std::lock_guard lock(guard);
                if (!first) {
                    first = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
    if (first) {
        std::rethrow_exception(first);
    }
}

}  // namespace wavecore
