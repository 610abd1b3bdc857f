#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace n2k {

namespace detail {
inline std::atomic<std::size_t>& thread_count_slot() {
    static std::atomic<std::size_t> n{0};  // 0 = decide from hardware
    return n;
}
inline bool& in_parallel_flag() {
    thread_local bool flag = false;
    return flag;
}
}  // namespace detail

inline void set_num_threads(std::size_t n) { detail::thread_count_slot().store(n); }

inline std::size_t num_threads() {
    std::size_t n = detail::thread_count_slot().load();
    if (n == 0) {
        n = std::thread::hardware_concurrency();
        if (n == 0) n = 1;
    }
    return n;
}

// Static partition of [0, n) into one contiguous chunk per worker;
// fn(begin, end) runs once per chunk. Chunks are disjoint, so results are
// bit-identical for any worker count. Nested calls run inline.
inline void parallel_for(std::size_t n,
                         const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    const std::size_t workers = std::min(num_threads(), n);
    if (workers <= 1 || detail::in_parallel_flag()) {
        fn(0, n);
        return;
    }
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> threads;
    threads.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        threads.emplace_back([&fn, begin, end] {
            detail::in_parallel_flag() = true;
            fn(begin, end);
            detail::in_parallel_flag() = false;
        });
    }
    detail::in_parallel_flag() = true;
    fn(0, std::min(n, chunk));
    detail::in_parallel_flag() = false;
    for (auto& t : threads) t.join();
}

}  // namespace n2k
