#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

// Task fan-out for independent work items. Items write only their own slot
// of a preallocated result vector, so outputs are identical for any thread
// count; the items themselves must not share mutable state.

namespace qmc {

inline void parallel_for(int count, int threads, const std::function<void(int)>& item) {
    if (count <= 0) return;
    if (threads > count) threads = count;
    if (threads <= 1) {
        for (int i = 0; i < count; ++i) item(i);
        return;
    }
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count && !failed.load(); i = next.fetch_add(1)) {
                try {
                    item(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    failed.store(true);
                }
            }
        });
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace qmc
