// Copyright (c) 2026 pnlab contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace pnlab {

/// Number of worker threads used by parallel_for (default 1).
int thread_count();
void set_thread_count(int n);

/// Runs body(k) for k in [begin, end), split into contiguous static chunks.
/// Each index is visited exactly once, so results never depend on the thread
/// count as long as body(k) writes only to slots owned by k.
template <typename Body>
void parallel_for(int begin, int end, Body&& body) {
    const int n = end - begin;
    const int workers = std::min(thread_count(), n);
    if (workers <= 1) {
        for (int k = begin; k < end; ++k) body(k);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        const int lo = begin + n * w / workers;
        const int hi = begin + n * (w + 1) / workers;
        pool.emplace_back([lo, hi, &body] {
            for (int k = lo; k < hi; ++k) body(k);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace pnlab
