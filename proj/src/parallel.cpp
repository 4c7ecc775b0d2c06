// Copyright 2026 The ssibl Authors
// SPDX-License-Identifier: Apache-2.0

#include "ssibl/parallel.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ssibl {

namespace {
std::atomic<int> g_thread_count{0};
}

void set_thread_count(int count) { g_thread_count = std::max(0, count); }

int thread_count() {
    int n = g_thread_count.load();
    if (n > 0)
        return n;
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(int64_t begin, int64_t end, const std::function<void(int64_t)> &body) {
    if (end <= begin)
        return;
    const int64_t count = end - begin;
    const int workers = static_cast<int>(std::min<int64_t>(thread_count(), count));
    if (workers <= 1) {
        for (int64_t i = begin; i < end; ++i)
            body(i);
        return;
    }

    // Small chunks handed out dynamically keep load balanced.
    const int64_t chunk = std::max<int64_t>(1, count / (int64_t(workers) * 16));
    std::atomic<int64_t> next{begin};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto worker = [&] {
        for (;;) {
            int64_t start = next.fetch_add(chunk);
            if (start >= end)
                return;
            int64_t stop = std::min(end, start + chunk);
            try {
                for (int64_t i = start; i < stop; ++i)
                    body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error)
                    error = std::current_exception();
                next = end;
                return;
            }
        }
    };

    std::vector<std::jthread> threads;
    threads.reserve(workers - 1);
    for (int t = 1; t < workers; ++t)
        threads.emplace_back(worker);
    worker();
    threads.clear();
    if (error)
        std::rethrow_exception(error);
}

}  // namespace ssibl
