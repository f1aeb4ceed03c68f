#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace blockcorr {

inline int resolve_jobs(int jobs) noexcept {
    if (jobs > 0) return jobs;
    return static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
}

/// Runs body(i) for i in [0, count) on up to `jobs` threads (0 = all cores).
/// Each index runs exactly once; the first exception is rethrown after joining.
template <class Body>
void parallel_for(std::size_t count, int jobs, Body&& body) {
    const auto workers = static_cast<std::size_t>(std::min<std::size_t>(resolve_jobs(jobs), count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                try {
                    for (std::size_t i = next++; i < count; i = next++) body(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next = count;
                }
            });
    }
    if (failure) std::rethrow_exception(failure);
}

} // namespace blockcorr
