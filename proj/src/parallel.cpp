// Copyright Contributors to the panogabor project
// SPDX-License-Identifier: Apache-2.0

#include "pgf/parallel.hpp"

#include <atomic>
#include <thread>
#include <vector>

namespace pgf {

namespace {
std::atomic<int> g_max_threads{1};
}  // namespace

void set_max_threads(int n) { g_max_threads.store(n < 1 ? 1 : n); }

int max_threads() { return g_max_threads.load(); }

void parallel_for(int64_t n, const std::function<void(int64_t, int64_t)>& fn) {
    if (n <= 0) return;
    const int threads = g_max_threads.load();
    if (threads <= 1 || n < 2) {
        fn(0, n);
        return;
    }
    const int64_t chunks = std::min<int64_t>(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(chunks));
    for (int64_t t = 0; t < chunks; ++t) {
        const int64_t begin = n * t / chunks;
        const int64_t end = n * (t + 1) / chunks;
        pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace pgf
