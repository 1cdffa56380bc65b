#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace lcurve {

// Runs f(i) for i in [0, n). Exceptions are rethrown in index order after all tasks finish.
template <class F>
void parallel_for(int n, int threads, F&& f)
{
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(std::max(n, 0)));
    auto run = [&](int i) {
        try {
            f(i);
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    };
    if (threads <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) run(i);
    } else {
        std::atomic<int> next{0};
        std::vector<std::jthread> pool;
        const int workers = std::min(threads, n);
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (int i = next++; i < n; i = next++) run(i);
            });
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace lcurve
