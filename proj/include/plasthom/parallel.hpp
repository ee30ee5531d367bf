#pragma once

#include <algorithm>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace plasthom {

/// Runs body(i) for i in [0, n) on up to `threads` workers (threads <= 0: hardware
/// concurrency). Work items are independent and write to their own slots, so
/// results do not depend on scheduling. The exception of the lowest failing
/// index is rethrown.
inline void parallel_for(int n, int threads, const std::function<void(int)>& body) {
    if (n <= 0) return;
    int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min(workers, n));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
    auto run = [&](int w) {
        for (int i = w; i < n; i += workers) {
            try {
                body(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        run(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(run, w);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace plasthom
