#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace dualex::detail {

// Run fn(row_begin, row_end) over [0, rows) on a few threads. Chunks are
// contiguous and writes must be disjoint per row, so results do not depend
// on scheduling. Small workloads stay on the calling thread.
template <class Fn>
void parallel_rows(int rows, std::size_t total_elements, Fn&& fn) {
    unsigned hw = std::thread::hardware_concurrency();
    if (rows < 2 || hw < 2 || total_elements < (1u << 16)) {
        fn(0, rows);
        return;
    }
    int threads = static_cast<int>(std::min<unsigned>(hw, static_cast<unsigned>(rows)));
    std::vector<std::thread> pool;
    pool.reserve(threads - 1);
    int chunk = (rows + threads - 1) / threads;
    for (int t = 1; t < threads; ++t) {
        int begin = t * chunk;
        int end = std::min(rows, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    fn(0, std::min(rows, chunk));
    for (auto& th : pool) th.join();
}

}  // namespace dualex::detail
