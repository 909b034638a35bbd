#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace captchastar {

/// Resolve a requested worker count; 0 means one per hardware thread.
inline unsigned worker_count(unsigned requested) {
    if (requested != 0) {
        return requested;
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

/// Split [0, n) into `workers` contiguous chunks and run body(worker, begin, end)
/// for each, on separate threads when workers > 1. Rethrows the first failure.
template <typename Body>
void parallel_chunks(std::size_t n, unsigned workers, Body&& body) {
    workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1U, workers), std::max<std::size_t>(n, 1)));
    if (workers == 1) {
        body(0U, std::size_t{0}, n);
        return;
    }
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t begin = std::min(n, w * chunk);
        const std::size_t end = std::min(n, begin + chunk);
        threads.emplace_back([&, w, begin, end] {
            try {
                body(w, begin, end);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) {
        t.join();
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

}  // namespace captchastar
