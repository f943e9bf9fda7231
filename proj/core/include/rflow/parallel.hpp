// Copyright (C) 2026 The reflectionflow authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

namespace rflow {

// Runs fn(0..count-1) on up to `jobs` worker threads. Results must be
// written to per-index slots; the schedule carries no ordering guarantees.
// The first exception thrown by any worker is rethrown after all workers
// join. jobs <= 1 runs inline.
void parallel_for(std::size_t count, int jobs,
                  const std::function<void(std::size_t)>& fn);

}  // namespace rflow
