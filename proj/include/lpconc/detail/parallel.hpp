#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lpconc::detail {

inline std::size_t worker_count(std::size_t tasks) {
    std::size_t hw = std::thread::hardware_concurrency();
    if (hw == 0) {
        hw = 1;
    }
    return std::max<std::size_t>(1, std::min(hw, tasks));
}

/**
 * Calls `body(i)` for every i in [0, count). Work is handed out dynamically,
 * so callers must write results into per-index slots and reduce them in index
 * order afterwards; that keeps every reduction independent of thread count.
 *
 * The first exception thrown by any task is rethrown on the calling thread.
 */
template <typename Body>
void parallel_for(std::size_t count, Body&& body) {
    const std::size_t workers = worker_count(count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto run = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= count) {
                return;
            }
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                next.store(count, std::memory_order_relaxed);
                return;
            }
        }
    };

    std::vector<std::thread> threads;
    threads.reserve(workers - 1);
    for (std::size_t t = 1; t < workers; ++t) {
        threads.emplace_back(run);
    }
    run();
    for (auto& thread : threads) {
        thread.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

} // namespace lpconc::detail
