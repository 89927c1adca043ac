#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace swave {

inline int default_workers() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Run fn(i) for i in [0, count) on up to `workers` threads. Work items must
/// write only to their own output slots; completion order is unspecified.
/// The first exception is captured and rethrown after all threads join.
inline void parallel_for(std::int64_t count, int workers,
                         const std::function<void(std::int64_t)>& fn) {
    if (count <= 0) return;
    if (workers < 1) workers = 1;
    if (workers == 1 || count == 1) {
        for (std::int64_t i = 0; i < count; ++i) fn(i);
        return;
    }
    workers = static_cast<int>(std::min<std::int64_t>(workers, count));

    std::atomic<std::int64_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;

    auto body = [&]() {
        for (;;) {
            const std::int64_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();

    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace swave
