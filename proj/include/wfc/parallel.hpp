#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace wfc {

inline std::size_t default_workers() {
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// Runs fn(worker, begin, end) over contiguous chunks of [0, count) on at most
/// `workers` threads. The first exception thrown by any chunk is rethrown.
template <typename Fn>
void parallel_chunks(std::size_t count, std::size_t workers, Fn&& fn) {
    workers = std::max<std::size_t>(1, std::min(workers, count));
    if (workers <= 1) {
        if (count) fn(std::size_t{0}, std::size_t{0}, count);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> threads;
        std::size_t chunk = (count + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w) {
            std::size_t begin = w * chunk;
            std::size_t end = std::min(count, begin + chunk);
            if (begin >= end) break;
            threads.emplace_back([&, w, begin, end] {
                try {
                    fn(w, begin, end);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            });
        }
    }
    if (error) std::rethrow_exception(error);
}

/// Order-preserving parallel map.
template <typename T, typename Fn>
auto parallel_map(const std::vector<T>& items, std::size_t workers, Fn&& fn) {
    using R = decltype(fn(items.front()));
    std::vector<R> out(items.size());
    parallel_chunks(items.size(), workers, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) out[i] = fn(items[i]);
    });
    return out;
}

}  // namespace wfc
