// Copyright Contributors to the panogabor project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>

namespace pgf {

/// Caps the number of worker threads used by the library (minimum 1).
void set_max_threads(int n);
int max_threads();

/// Runs fn over contiguous sub-ranges of [0, n). Every index is handled by
/// exactly one invocation and each index's computation must not depend on the
/// partition, so results are bitwise identical for any thread count.
void parallel_for(int64_t n, const std::function<void(int64_t begin, int64_t end)>& fn);

}  // namespace pgf
