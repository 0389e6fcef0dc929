#pragma once

#include <atomic>
#include <functional>
#include <vector>

namespace specret {

/// Worker count for data-parallel loops: SPECRET_THREADS if set (min 1),
/// otherwise min(hardware_concurrency, 4).
int thread_budget();

/// Runs body(0..n-1) across up to n_threads workers. Each index is processed
/// exactly once; callers must keep per-index outputs independent and reduce
/// them in index order afterwards so results do not depend on scheduling.
void parallel_for(int n, int n_threads, const std::function<void(int)>& body);

}  // namespace specret
