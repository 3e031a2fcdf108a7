#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace abelbias::detail {

/// Splits [0, total) into `jobs` contiguous ranges and runs fn(job, lo, hi) on each, one
/// thread per range. The first exception thrown by any worker is rethrown.
template <class Fn>
void parallel_ranges(std::int64_t total, unsigned jobs, Fn&& fn) {
    jobs = std::max(1u, jobs);
    if (jobs == 1 || total < 2) {
        fn(0u, std::int64_t{0}, total);
        return;
    }
    jobs = static_cast<unsigned>(std::min<std::int64_t>(jobs, total));
    std::vector<std::exception_ptr> errors(jobs);
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) {
        const std::int64_t lo = total * j / jobs;
        const std::int64_t hi = total * (j + 1) / jobs;
        pool.emplace_back([&, j, lo, hi] {
            try {
                fn(j, lo, hi);
            } catch (...) {
                errors[j] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace abelbias::detail
