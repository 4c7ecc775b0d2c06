// Copyright 2026 The ssibl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>

namespace ssibl {

// Worker count used by parallel_for. 0 means "all hardware threads".
void set_thread_count(int count);
int thread_count();

// Runs body(i) for i in [begin, end). Work is split into contiguous chunks;
// callers must write results by index so output never depends on scheduling.
void parallel_for(int64_t begin, int64_t end, const std::function<void(int64_t)> &body);

}  // namespace ssibl
