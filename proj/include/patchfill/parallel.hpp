#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace pf {

inline int hardware_threads() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

// Runs fn(0..n_items) on up to n_workers threads. Items are claimed from an
// atomic counter, so this is only used where fn(i) writes state disjoint per
// item (results are then independent of scheduling). The first exception (by
// lowest item index) is rethrown on the caller thread.
inline void parallel_for(int n_items, int n_workers, const std::function<void(int)>& fn) {
    if (n_items <= 0) return;
    if (n_workers > n_items) n_workers = n_items;
    if (n_workers <= 1) {
        for (int i = 0; i < n_items; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(static_cast<size_t>(n_items));
    auto worker = [&] {
        for (;;) {
            int i = next.fetch_add(1);
            if (i >= n_items) return;
            try {
                fn(i);
            } catch (...) {
                errors[static_cast<size_t>(i)] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace pf
