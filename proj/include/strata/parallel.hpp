#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace strata {

// Static block partition over [begin, end). Each index is processed exactly
// once; workers write only to caller-owned slots indexed by i, so results do
// not depend on the thread count.
inline void parallel_for(int begin, int end, int threads, const std::function<void(int)>& fn) {
    if (end <= begin) return;
    if (threads <= 1) {
        for (int i = begin; i < end; ++i) fn(i);
        return;
    }
    int span = end - begin;
    int workers = std::min(threads, span);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        int lo = begin + static_cast<int>(static_cast<long long>(span) * w / workers);
        int hi = begin + static_cast<int>(static_cast<long long>(span) * (w + 1) / workers);
        pool.emplace_back([lo, hi, &fn] {
            for (int i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace strata
