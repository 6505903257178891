#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <type_traits>
#include <vector>

namespace astkit {

// Calls fn(i) for every i in [0, n) on up to `jobs` threads. Work is handed
// out through an atomic counter, so the call order is unspecified; callers
// write results into index-addressed slots to keep output order fixed. The
// first exception thrown by any task is rethrown on the calling thread.
template <typename Fn>
void parallel_for(std::size_t jobs, std::size_t n, Fn &&fn) {
    jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(n, 1));
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto &th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

// Index-ordered map: result[i] = fn(i), independent of `jobs`.
template <typename Fn>
auto parallel_map(std::size_t jobs, std::size_t n, Fn &&fn) {
    using R = std::invoke_result_t<Fn &, std::size_t>;
    std::vector<R> out(n);
    parallel_for(jobs, n, [&](std::size_t i) { out[i] = fn(i); });
    return out;
}

} // namespace astkit
